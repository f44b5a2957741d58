//! Topology graphs of hyperbolic point sets and Thue-Morse matrix words.
//!
//! A set's topology graph stores the pairwise geodesic distances as a dense
//! symmetric adjacency matrix `A` together with the row-sum degree matrix
//! `D`. Thue-Morse words over the alphabet `{A, D}` are evaluated as matrix
//! products, and the topological distance between two sets averages the
//! Frobenius norms of the differences between their word evaluations:
//!
//! ```text
//! d_t = 1/(n+1) * sum_{i=0..n} || t_i^x - t_i^y ||_F
//! ```

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::set::PointSet;

/// Default index of the last Thue-Morse word used by the distance (five
/// words `t_0..t_4`).
pub const DEFAULT_TM_TERMS: usize = 4;

/// Letters of the matrix-word alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    /// Degree matrix.
    D,
    /// Adjacency matrix.
    A,
}

impl Letter {
    fn swapped(self) -> Self {
        match self {
            Letter::D => Letter::A,
            Letter::A => Letter::D,
        }
    }
}

/// A word over `{A, D}`, displayed as e.g. `"DAAD"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::D => "D",
                Letter::A => "A",
            })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'D' => Ok(Letter::D),
                'A' => Ok(Letter::A),
                other => Err(Error::InvalidParameter {
                    detail: format!("invalid word letter {other:?}, expected A or D"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// The Thue-Morse words `t_0..t_n`: `t_0 = D`, `t_i = t_{i-1}` followed by
/// its letter-wise swap. `|t_i| = 2^i`.
pub fn thue_morse_words(n: usize) -> Vec<Word> {
    let mut words = Vec::with_capacity(n + 1);
    words.push(Word(vec![Letter::D]));
    for _ in 0..n {
        let prev = &words.last().unwrap().0;
        let mut next = prev.clone();
        next.extend(prev.iter().map(|l| l.swapped()));
        words.push(Word(next));
    }
    words
}

/// True iff the word contains no overlap, i.e. no factor `c x c x c` with
/// `c` a single letter and `x` a possibly empty subword.
pub fn is_overlap_free(word: &Word) -> bool {
    let w = &word.0;
    let n = w.len();
    // An overlap of period k occupies 2k+1 positions and repeats each of the
    // first k+1 letters k positions later.
    for k in 1..=n.saturating_sub(1) / 2 {
        'starts: for start in 0..=(n - 2 * k - 1) {
            for j in 0..=k {
                if w[start + j] != w[start + j + k] {
                    continue 'starts;
                }
            }
            return false;
        }
    }
    true
}

/// Dense topology graph of a point set: symmetric nonnegative adjacency with
/// zero diagonal plus the diagonal row-sum degree matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyGraph {
    adjacency: Array2<f64>,
    degree: Array2<f64>,
}

impl TopologyGraph {
    /// Wraps an adjacency matrix, validating symmetry, zero diagonal and
    /// nonnegativity; the degree matrix is derived from the row sums.
    pub fn new(adjacency: Array2<f64>) -> Result<Self> {
        let (r, c) = adjacency.dim();
        if r != c {
            return Err(Error::MatrixShape {
                detail: format!("adjacency must be square, got {r}x{c}"),
            });
        }
        for i in 0..r {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::MatrixShape {
                    detail: format!("adjacency diagonal must be zero at ({i},{i})"),
                });
            }
            for j in 0..r {
                let v = adjacency[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::MatrixShape {
                        detail: format!("adjacency entry ({i},{j}) = {v} is not a finite nonnegative real"),
                    });
                }
                if (v - adjacency[(j, i)]).abs() > 0.0 {
                    return Err(Error::MatrixShape {
                        detail: format!("adjacency not symmetric at ({i},{j})"),
                    });
                }
            }
        }
        let mut degree = Array2::zeros((r, r));
        for i in 0..r {
            degree[(i, i)] = adjacency.row(i).sum();
        }
        Ok(TopologyGraph { adjacency, degree })
    }

    /// Builds the graph of pairwise geodesic distances of a point set.
    pub fn from_point_set(set: &PointSet) -> Result<Self> {
        let n = set.len();
        let pts = set.points();
        let mut adjacency = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pts[i].geodesic_distance(&pts[j])?;
                adjacency[(i, j)] = d;
                adjacency[(j, i)] = d;
            }
        }
        Self::new(adjacency)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn degree(&self) -> &Array2<f64> {
        &self.degree
    }

    /// Row-stochastic rescaling: divides the adjacency by its largest row
    /// sum (a magnitude control for long word products). The all-zero graph
    /// is returned unchanged.
    pub fn row_normalized(&self) -> Self {
        let max_row_sum = (0..self.n())
            .map(|i| self.adjacency.row(i).sum())
            .fold(0.0_f64, f64::max);
        if max_row_sum <= 0.0 {
            return self.clone();
        }
        let adjacency = self.adjacency.mapv(|v| v / max_row_sum);
        Self::new(adjacency).expect("rescaling preserves validity")
    }
}

/// Builds the pairwise-geodesic-distance graph of a point set.
pub fn build_topology_graph(set: &PointSet) -> Result<TopologyGraph> {
    TopologyGraph::from_point_set(set)
}

/// Evaluates a word as a left-to-right matrix product, substituting `A` with
/// the adjacency and `D` with the degree matrix. The empty word is the
/// identity. Overflow to non-finite entries is reported with a hint to
/// normalize.
pub fn evaluate_word(word: &Word, graph: &TopologyGraph) -> Result<Array2<f64>> {
    let n = graph.n();
    let mut product = Array2::eye(n);
    for letter in word.letters() {
        let factor = match letter {
            Letter::A => graph.adjacency(),
            Letter::D => graph.degree(),
        };
        product = product.dot(factor);
    }
    if product.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow {
            word: word.to_string(),
        });
    }
    Ok(product)
}

/// The evaluations of `t_0..t_n` on one graph.
#[derive(Debug, Clone)]
pub struct ThueMorseSignature {
    terms: Vec<Array2<f64>>,
}

impl ThueMorseSignature {
    pub fn terms(&self) -> &[Array2<f64>] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn n(&self) -> usize {
        self.terms[0].nrows()
    }
}

/// Computes the Thue-Morse signature `t_0..t_n` of a graph.
pub fn thue_morse_signature(graph: &TopologyGraph, n: usize) -> Result<ThueMorseSignature> {
    let terms = thue_morse_words(n)
        .iter()
        .map(|w| evaluate_word(w, graph))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThueMorseSignature { terms })
}

pub(crate) fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Average Frobenius distance between two signatures of equal shape.
pub fn signature_distance(a: &ThueMorseSignature, b: &ThueMorseSignature) -> Result<f64> {
    if a.term_count() != b.term_count() {
        return Err(Error::MatrixShape {
            detail: format!(
                "signatures have {} vs {} terms",
                a.term_count(),
                b.term_count()
            ),
        });
    }
    if a.n() != b.n() {
        return Err(Error::CardinalityMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let total: f64 = a
        .terms()
        .iter()
        .zip(b.terms())
        .map(|(tx, ty)| frobenius_norm(&(tx - ty)))
        .sum();
    Ok(total / a.term_count() as f64)
}

/// Topological distance `d_t` between two sets of equal cardinality and
/// curvature, using words `t_0..t_tm_terms`. `normalize` applies the
/// row-stochastic rescaling to both graphs before word evaluation.
pub fn topological_distance(
    sx: &PointSet,
    sy: &PointSet,
    tm_terms: usize,
    normalize: bool,
) -> Result<f64> {
    if sx.len() != sy.len() {
        return Err(Error::CardinalityMismatch {
            left: sx.len(),
            right: sy.len(),
        });
    }
    if sx.curvature() != sy.curvature() {
        return Err(Error::CurvatureMismatch {
            left: sx.curvature().get(),
            right: sy.curvature().get(),
        });
    }
    let sig = |s: &PointSet| -> Result<ThueMorseSignature> {
        let mut g = TopologyGraph::from_point_set(s)?;
        if normalize {
            g = g.row_normalized();
        }
        thue_morse_signature(&g, tm_terms)
    };
    signature_distance(&sig(sx)?, &sig(sy)?)
}
