//! Desk-scale verification kit for trees: distance-matrix recursion,
//! trace/cospectrality tests, centers, brute-force isomorphism and the
//! word-trace signatures used by the collision survey.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::topology::{Letter, Word};

mod enumerate;
mod survey;

pub use enumerate::{all_unlabeled_trees, canonical_code, prufer_decode, random_tree};
pub use survey::{signature_collision_survey, SurveyReport, SIGNATURE_TOLERANCE};

/// Vertex-count cap for the factorial isomorphism search.
pub const BRUTE_FORCE_LIMIT: usize = 10;
/// Vertex-count cap for exhaustive unlabeled-tree enumeration.
pub const ENUMERATION_LIMIT: usize = 9;

/// An unweighted connected acyclic graph on vertices `0..n`.
///
/// Edges are stored normalized (`u < v`) and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Tree {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree {
                detail: "a tree needs at least one vertex".into(),
            });
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree {
                detail: format!("{n} vertices require {} edges, got {}", n - 1, edges.len()),
            });
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidTree {
                    detail: format!("self-loop at vertex {u}"),
                });
            }
            if u >= n || v >= n {
                return Err(Error::InvalidTree {
                    detail: format!("edge ({u},{v}) out of range for {n} vertices"),
                });
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if normalized.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree {
                detail: "duplicate edge".into(),
            });
        }
        let tree = Tree {
            n,
            edges: normalized,
        };
        // n-1 edges + connected => acyclic
        if tree.bfs_distances(0).iter().any(|&d| d == usize::MAX) {
            return Err(Error::InvalidTree {
                detail: "graph is disconnected".into(),
            });
        }
        Ok(tree)
    }

    pub fn path(n: usize) -> Self {
        Tree::new(n, (1..n).map(|v| (v - 1, v)).collect()).expect("path is a tree")
    }

    /// The star with one hub (vertex 0) and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        Tree::new(n, (1..n).map(|v| (0, v)).collect()).expect("star is a tree")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// 0/1 adjacency and diagonal degree matrices in exact integers.
    pub fn adjacency_degree(&self) -> (Array2<i64>, Array2<i64>) {
        let mut a = Array2::zeros((self.n, self.n));
        let mut d = Array2::zeros((self.n, self.n));
        for &(u, v) in &self.edges {
            a[(u, v)] = 1;
            a[(v, u)] = 1;
            d[(u, u)] += 1;
            d[(v, v)] += 1;
        }
        (a, d)
    }

    /// BFS distances from `start`; `usize::MAX` marks unreachable vertices
    /// (only possible on invalid inputs during construction).
    pub fn bfs_distances(&self, start: usize) -> Vec<usize> {
        let adj = self.neighbors();
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn diameter(&self) -> usize {
        (0..self.n)
            .map(|v| self.bfs_distances(v).into_iter().max().unwrap())
            .max()
            .unwrap()
    }

    /// Applies a vertex relabeling; `perm[v]` is the new label of `v`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter {
                detail: "permutation length disagrees with vertex count".into(),
            });
        }
        Tree::new(
            self.n,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect(),
        )
    }
}

/// The 0/1 distance matrices `delta_0..delta_r` of a tree, computed by the
/// three-term recursion `delta_{r+1} = A delta_r - (D - I) delta_{r-1}`.
///
/// On a tree, a vertex at distance `r + 1` from `j` has exactly one neighbor
/// at distance `r`, while a vertex at distance `r - 1` has `deg - 1` such
/// neighbors; the recursion cancels the latter.
#[derive(Debug, Clone)]
pub struct DistanceMatrixStack {
    matrices: Vec<Array2<i64>>,
}

impl DistanceMatrixStack {
    pub fn matrices(&self) -> &[Array2<i64>] {
        &self.matrices
    }
}

/// Builds `delta_0 = I, delta_1 = A, delta_2 = A^2 - D` and the recursion up
/// to `r_max`, in exact integer arithmetic. A non-0/1 entry is reported as
/// an invalid-tree signal.
pub fn distance_matrix_stack(tree: &Tree, r_max: usize) -> Result<DistanceMatrixStack> {
    let n = tree.n();
    let (a, d) = tree.adjacency_degree();
    let identity = Array2::from_diag_elem(n, 1);
    let mut matrices = vec![identity.clone()];
    if r_max >= 1 {
        matrices.push(a.clone());
    }
    if r_max >= 2 {
        matrices.push(a.dot(&a) - &d);
    }
    let d_minus_i = &d - &identity;
    while matrices.len() <= r_max {
        let prev = &matrices[matrices.len() - 1];
        let prev2 = &matrices[matrices.len() - 2];
        let next = a.dot(prev) - d_minus_i.dot(prev2);
        matrices.push(next);
    }
    for (r, m) in matrices.iter().enumerate() {
        if m.iter().any(|&v| v != 0 && v != 1) {
            return Err(Error::InvalidTree {
                detail: format!("distance matrix delta_{r} has a non-0/1 entry"),
            });
        }
    }
    Ok(DistanceMatrixStack { matrices })
}

/// True iff `tr(m1^k)` and `tr(m2^k)` agree for `k = 1..n` within `tol`
/// (relative for magnitudes above 1).
pub fn cospectral(m1: &Array2<f64>, m2: &Array2<f64>, tol: f64) -> Result<bool> {
    let n = m1.nrows();
    if m1.dim() != m2.dim() || m1.nrows() != m1.ncols() {
        return Err(Error::MatrixShape {
            detail: format!("cospectral expects equal square matrices, got {:?} vs {:?}", m1.dim(), m2.dim()),
        });
    }
    let mut p1 = m1.clone();
    let mut p2 = m2.clone();
    for k in 1..=n {
        let t1 = p1.diag().sum();
        let t2 = p2.diag().sum();
        if (t1 - t2).abs() > tol * t1.abs().max(t2.abs()).max(1.0) {
            return Ok(false);
        }
        if k < n {
            p1 = p1.dot(m1);
            p2 = p2.dot(m2);
        }
    }
    Ok(true)
}

/// Traces `tr(w(A, D)^m)` for each word and `m = 1..max_power`, in
/// word-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSignature {
    values: Vec<f64>,
}

impl TraceSignature {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entrywise comparison, relative for magnitudes above 1.
    pub fn approx_eq(&self, other: &TraceSignature, tol: f64) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0))
    }
}

/// Evaluates each word on the tree's `(A, D)` pair and collects power traces.
/// Word products run in f64; values stay exact well past the sizes handled
/// here and comparisons are relative.
pub fn word_trace_signature(tree: &Tree, words: &[Word], max_power: usize) -> TraceSignature {
    let (a, d) = tree.adjacency_degree();
    let a = a.mapv(|v| v as f64);
    let d = d.mapv(|v| v as f64);
    let mut values = Vec::with_capacity(words.len() * max_power);
    for word in words {
        let mut base = Array2::eye(tree.n());
        for letter in word.letters() {
            base = match letter {
                Letter::A => base.dot(&a),
                Letter::D => base.dot(&d),
            };
        }
        let mut power = base.clone();
        for m in 1..=max_power {
            values.push(power.diag().sum());
            if m < max_power {
                power = power.dot(&base);
            }
        }
    }
    TraceSignature { values }
}

/// Exhaustive vertex-bijection search with degree pruning; the ground-truth
/// oracle for everything else in this module. Limited to
/// [`BRUTE_FORCE_LIMIT`] vertices.
pub fn brute_force_isomorphic(t1: &Tree, t2: &Tree) -> Result<bool> {
    if t1.n() > BRUTE_FORCE_LIMIT || t2.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            what: "brute-force isomorphism",
            limit: BRUTE_FORCE_LIMIT,
            got: t1.n().max(t2.n()),
        });
    }
    if t1.n() != t2.n() {
        return Ok(false);
    }
    let n = t1.n();
    let adj1 = t1.neighbors();
    let deg1: Vec<usize> = adj1.iter().map(|a| a.len()).collect();
    let deg2: Vec<usize> = t2.neighbors().iter().map(|a| a.len()).collect();
    let mut sorted1 = deg1.clone();
    let mut sorted2 = deg2.clone();
    sorted1.sort_unstable();
    sorted2.sort_unstable();
    if sorted1 != sorted2 {
        return Ok(false);
    }
    let mut edge_set2 = std::collections::HashSet::new();
    for &(u, v) in t2.edges() {
        edge_set2.insert((u, v));
    }
    let has_edge2 = |u: usize, v: usize| edge_set2.contains(&(u.min(v), u.max(v)));

    // map vertices of t1 in order, checking edges to already-mapped ones
    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn assign(
        v: usize,
        n: usize,
        deg1: &[usize],
        deg2: &[usize],
        adj1: &[Vec<usize>],
        has_edge2: &dyn Fn(usize, usize) -> bool,
        mapping: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if v == n {
            return true;
        }
        for target in 0..n {
            if used[target] || deg1[v] != deg2[target] {
                continue;
            }
            let consistent = adj1[v]
                .iter()
                .filter(|&&u| u < v)
                .all(|&u| has_edge2(mapping[u], target));
            if !consistent {
                continue;
            }
            mapping[v] = target;
            used[target] = true;
            if assign(v + 1, n, deg1, deg2, adj1, has_edge2, mapping, used) {
                return true;
            }
            mapping[v] = usize::MAX;
            used[target] = false;
        }
        false
    }
    Ok(assign(
        0,
        n,
        &deg1,
        &deg2,
        &adj1,
        &has_edge2,
        &mut mapping,
        &mut used,
    ))
}

/// Vertices of smallest eccentricity: one vertex, or two joined by an edge.
pub fn tree_center(tree: &Tree) -> Vec<usize> {
    let eccentricities: Vec<usize> = (0..tree.n())
        .map(|v| tree.bfs_distances(v).into_iter().max().unwrap())
        .collect();
    let min = *eccentricities.iter().min().unwrap();
    eccentricities
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == min)
        .map(|(v, _)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::thue_morse_words;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tree_validation() {
        assert!(Tree::new(3, vec![(0, 1), (1, 2)]).is_ok());
        assert!(matches!(
            Tree::new(3, vec![(0, 1)]),
            Err(Error::InvalidTree { .. })
        ));
        assert!(matches!(
            Tree::new(3, vec![(0, 1), (1, 1)]),
            Err(Error::InvalidTree { .. })
        ));
        assert!(matches!(
            Tree::new(4, vec![(0, 1), (1, 0), (2, 3)]),
            Err(Error::InvalidTree { .. })
        ));
        // cycle + isolated vertex: right edge count but disconnected
        assert!(matches!(
            Tree::new(4, vec![(0, 1), (1, 2), (2, 0)]),
            Err(Error::InvalidTree { .. })
        ));
    }

    #[test]
    fn adjacency_degree_basics() {
        let (a, d) = Tree::path(2).adjacency_degree();
        assert_eq!(a[(0, 1)], 1);
        assert_eq!(a[(1, 0)], 1);
        assert_eq!(d[(0, 0)], 1);
        assert_eq!(d[(1, 1)], 1);

        let (_, d) = Tree::star(4).adjacency_degree();
        assert_eq!(d[(0, 0)], 3);
        for i in 1..4 {
            assert_eq!(d[(i, i)], 1);
        }

        // handshake identity on a random tree
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tree(8, &mut rng);
        let (_, d) = t.adjacency_degree();
        let degree_sum: i64 = (0..8).map(|i| d[(i, i)]).sum();
        assert_eq!(degree_sum, 14);
    }

    #[test]
    fn distance_stack_matches_bfs_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.random_range(2..=10);
            let t = random_tree(n, &mut rng);
            let diameter = t.diameter();
            let stack = distance_matrix_stack(&t, diameter).unwrap();
            for (r, m) in stack.matrices().iter().enumerate() {
                for i in 0..n {
                    let bfs = t.bfs_distances(i);
                    for j in 0..n {
                        let expected = if bfs[j] == r { 1 } else { 0 };
                        assert_eq!(m[(i, j)], expected, "n={n} r={r} ({i},{j})");
                    }
                }
            }
            // beyond the diameter every matrix is zero and the row sums
            // accumulate to the all-ones matrix
            let mut sum = Array2::<i64>::zeros((n, n));
            for m in stack.matrices() {
                sum += m;
            }
            assert!(sum.iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn distance_stack_path3() {
        let stack = distance_matrix_stack(&Tree::path(3), 2).unwrap();
        let d2 = &stack.matrices()[2];
        assert_eq!(d2[(0, 2)], 1);
        assert_eq!(d2[(2, 0)], 1);
        assert_eq!(d2.iter().filter(|&&v| v == 1).count(), 2);
        assert_eq!(stack.matrices()[0], Array2::from_diag_elem(3, 1));
    }

    #[test]
    fn cospectral_contracts() {
        let (a, _) = Tree::path(5).adjacency_degree();
        let a = a.mapv(|v| v as f64);
        // conjugation by a permutation preserves all traces
        let perm = [2usize, 0, 4, 1, 3];
        let mut b = Array2::zeros((5, 5));
        for i in 0..5 {
            for j in 0..5 {
                b[(perm[i], perm[j])] = a[(i, j)];
            }
        }
        assert!(cospectral(&a, &b, 1e-9).unwrap());
        let eye = Array2::eye(3);
        let twice = &eye * 2.0;
        assert!(!cospectral(&eye, &twice, 1e-9).unwrap());
        assert!(cospectral(&eye, &Array2::eye(4), 1e-9).is_err());
    }

    #[test]
    fn trace_signature_basics() {
        let t = Tree::star(6);
        let words = thue_morse_words(1); // D, DA
        let sig = word_trace_signature(&t, &words, 2);
        assert_eq!(sig.values().len(), words.len() * 2);
        // tr(D) = sum of degrees = 2(n-1)
        assert_eq!(sig.values()[0], 10.0);
        // single word "A": tr(A^2) = twice the edge count
        let a_word: Word = "A".parse().unwrap();
        let sig_a = word_trace_signature(&t, &[a_word], 2);
        assert_eq!(sig_a.values()[1], 10.0);
    }

    #[test]
    fn relabeling_preserves_trace_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let words = thue_morse_words(4);
        for _ in 0..30 {
            let n = rng.random_range(3..=10);
            let t = random_tree(n, &mut rng);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let relabeled = t.relabeled(&perm).unwrap();
            let s1 = word_trace_signature(&t, &words, n);
            let s2 = word_trace_signature(&relabeled, &words, n);
            assert!(s1.approx_eq(&s2, 1e-9));
        }
    }

    #[test]
    fn brute_force_isomorphism_cases() {
        let p4 = Tree::path(4);
        let s4 = Tree::star(4);
        assert!(brute_force_isomorphic(&p4, &p4).unwrap());
        assert!(!brute_force_isomorphic(&p4, &s4).unwrap());
        let relabeled = p4.relabeled(&[3, 1, 0, 2]).unwrap();
        assert!(brute_force_isomorphic(&p4, &relabeled).unwrap());
        let big = Tree::path(11);
        assert!(matches!(
            brute_force_isomorphic(&big, &big),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn labeled_trees_on_six_vertices_form_six_classes() {
        assert_eq!(all_unlabeled_trees(6).unwrap().len(), 6);
    }

    // Adjacency spectra alone cannot separate trees: the smallest
    // counterexample pair lives on 8 vertices.
    #[test]
    fn adjacency_cospectral_nonisomorphic_pairs_appear_at_n8() {
        for (n, expected_pairs) in [(4, 0), (5, 0), (6, 0), (7, 0), (8, 1)] {
            let trees = all_unlabeled_trees(n).unwrap();
            let adjacencies: Vec<Array2<f64>> = trees
                .iter()
                .map(|t| t.adjacency_degree().0.mapv(|v| v as f64))
                .collect();
            let mut found = 0;
            for i in 0..trees.len() {
                for j in (i + 1)..trees.len() {
                    if cospectral(&adjacencies[i], &adjacencies[j], 1e-9).unwrap() {
                        assert!(!brute_force_isomorphic(&trees[i], &trees[j]).unwrap());
                        found += 1;
                    }
                }
            }
            assert_eq!(found, expected_pairs, "n = {n}");
        }
    }

    #[test]
    fn centers_match_leaf_stripping() {
        assert_eq!(tree_center(&Tree::path(3)), vec![1]);
        assert_eq!(tree_center(&Tree::path(4)), vec![1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let n = rng.random_range(1..=10);
            let t = random_tree(n, &mut rng);
            let center = tree_center(&t);
            assert_eq!(center, leaf_stripping(&t), "tree {:?}", t.edges());
            assert!(center.len() == 1 || center.len() == 2);
            if center.len() == 2 {
                let e = (center[0].min(center[1]), center[0].max(center[1]));
                assert!(t.edges().contains(&e), "bicentral vertices must be adjacent");
            }
        }
    }

    // independent oracle: repeatedly strip all current leaves
    fn leaf_stripping(t: &Tree) -> Vec<usize> {
        let n = t.n();
        if n == 1 {
            return vec![0];
        }
        let mut degree: Vec<usize> = t.neighbors().iter().map(|a| a.len()).collect();
        let adj = t.neighbors();
        let mut alive = vec![true; n];
        let mut remaining = n;
        while remaining > 2 {
            let leaves: Vec<usize> = (0..n).filter(|&v| alive[v] && degree[v] <= 1).collect();
            for &leaf in &leaves {
                alive[leaf] = false;
                remaining -= 1;
                for &u in &adj[leaf] {
                    if alive[u] {
                        degree[u] -= 1;
                    }
                }
            }
        }
        (0..n).filter(|&v| alive[v]).collect()
    }
}
