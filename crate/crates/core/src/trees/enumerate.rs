//! Tree generation: Prufer decoding, AHU canonical codes and exhaustive
//! unlabeled enumeration by canonical-form deduplication.
//!
//! The enumeration walks all `n^(n-2)` Prufer sequences, so the hot path
//! avoids heap allocation entirely: adjacency lives in per-vertex bitmasks
//! and AHU codes are packed parenthesis bit strings (length `2n <= 18 bits`
//! at the supported sizes).

use std::collections::HashMap;

use rand::{Rng, RngExt};

use crate::error::{Error, Result};

use super::{tree_center, Tree, ENUMERATION_LIMIT};

const MAX_N: usize = 16;

/// Decodes a Prufer sequence of length `n - 2` into a labeled tree on `n`
/// vertices (`n >= 2`; the empty sequence gives the single edge).
pub fn prufer_decode(seq: &[usize], n: usize) -> Result<Tree> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            detail: "prufer decoding needs at least 2 vertices".into(),
        });
    }
    if seq.len() != n - 2 {
        return Err(Error::InvalidParameter {
            detail: format!("prufer sequence for {n} vertices must have length {}", n - 2),
        });
    }
    if seq.iter().any(|&v| v >= n) {
        return Err(Error::InvalidParameter {
            detail: "prufer sequence entry out of range".into(),
        });
    }
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let last: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((last[0], last[1]));
    Tree::new(n, edges)
}

/// Uniform random labeled tree via a random Prufer sequence.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Tree {
    if n == 1 {
        return Tree::new(1, vec![]).unwrap();
    }
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.random_range(0..n)).collect();
    prufer_decode(&seq, n).expect("random sequence is valid")
}

// AHU code of the subtree rooted at `v`, parentheses as bytes b'(' / b')'.
fn ahu(v: usize, parent: usize, adj: &[Vec<usize>]) -> Vec<u8> {
    let mut child_codes: Vec<Vec<u8>> = adj[v]
        .iter()
        .filter(|&&u| u != parent)
        .map(|&u| ahu(u, v, adj))
        .collect();
    child_codes.sort();
    let mut code = Vec::with_capacity(2 + child_codes.iter().map(Vec::len).sum::<usize>());
    code.push(b'(');
    for c in child_codes {
        code.extend_from_slice(&c);
    }
    code.push(b')');
    code
}

/// Canonical byte string of an unlabeled tree: the minimum AHU code over
/// the (one or two) center roots. Equal codes iff isomorphic.
pub fn canonical_code(tree: &Tree) -> Vec<u8> {
    let adj = tree.neighbors();
    tree_center(tree)
        .into_iter()
        .map(|root| ahu(root, usize::MAX, &adj))
        .min()
        .expect("a tree has a center")
}

// -- allocation-free variants used by the exhaustive enumeration --

// decode a Prufer sequence straight into neighbor bitmasks
fn decode_masks(seq: &[usize], n: usize) -> [u16; MAX_N] {
    let mut degree = [0u8; MAX_N];
    for v in 0..n {
        degree[v] = 1;
    }
    for &v in seq {
        degree[v] += 1;
    }
    let mut masks = [0u16; MAX_N];
    let connect = |masks: &mut [u16; MAX_N], a: usize, b: usize| {
        masks[a] |= 1 << b;
        masks[b] |= 1 << a;
    };
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        connect(&mut masks, leaf, v);
        degree[leaf] = 0;
        degree[v] -= 1;
    }
    let first = (0..n).find(|&u| degree[u] == 1).unwrap();
    let second = ((first + 1)..n).find(|&u| degree[u] == 1).unwrap();
    connect(&mut masks, first, second);
    masks
}

// centers by leaf stripping on bitmask adjacency
fn mask_centers(masks: &[u16; MAX_N], n: usize) -> (usize, Option<usize>) {
    let mut alive: u16 = ((1u32 << n) - 1) as u16;
    let mut remaining = n;
    while remaining > 2 {
        let mut leaves: u16 = 0;
        for v in 0..n {
            if alive & (1 << v) != 0 && (masks[v] & alive).count_ones() <= 1 {
                leaves |= 1 << v;
            }
        }
        alive &= !leaves;
        remaining -= leaves.count_ones() as usize;
    }
    let first = alive.trailing_zeros() as usize;
    let rest = alive & !(1 << first);
    let second = (rest != 0).then(|| rest.trailing_zeros() as usize);
    (first, second)
}

// packed AHU code: '(' = 0, ')' = 1, MSB-first; `len` in bits
fn packed_ahu(v: usize, parent: usize, masks: &[u16; MAX_N]) -> (u32, u8) {
    let mut children = [(0u32, 0u8); MAX_N];
    let mut count = 0;
    let mut rest = masks[v];
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if u != parent {
            children[count] = packed_ahu(u, v, masks);
            count += 1;
        }
    }
    // fixed total order: compare left-aligned bit strings, shorter first
    children[..count].sort_unstable_by_key(|&(bits, len)| ((bits as u64) << (32 - len), len));
    let mut bits = 0u32; // leading '(' is the implicit 0 bit
    let mut len = 1u8;
    for &(cbits, clen) in &children[..count] {
        bits = (bits << clen) | cbits;
        len += clen;
    }
    bits = (bits << 1) | 1;
    (bits, len + 1)
}

fn packed_canonical(masks: &[u16; MAX_N], n: usize) -> u32 {
    let (c1, c2) = mask_centers(masks, n);
    let code1 = packed_ahu(c1, usize::MAX, masks).0;
    match c2 {
        Some(c2) => code1.min(packed_ahu(c2, usize::MAX, masks).0),
        None => code1,
    }
}

/// Enumerates every unlabeled tree on `n` vertices (one representative per
/// isomorphism class, in a deterministic canonical order), by decoding all
/// `n^(n-2)` Prufer sequences and deduplicating on canonical form. Limited
/// to [`ENUMERATION_LIMIT`] vertices.
pub fn all_unlabeled_trees(n: usize) -> Result<Vec<Tree>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            detail: "tree enumeration needs at least 1 vertex".into(),
        });
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            what: "unlabeled tree enumeration",
            limit: ENUMERATION_LIMIT,
            got: n,
        });
    }
    if n == 1 {
        return Ok(vec![Tree::new(1, vec![]).unwrap()]);
    }
    if n == 2 {
        return Ok(vec![Tree::new(2, vec![(0, 1)]).unwrap()]);
    }
    let mut classes: HashMap<u32, [u16; MAX_N]> = HashMap::new();
    let mut seq = vec![0usize; n - 2];
    'outer: loop {
        let masks = decode_masks(&seq, n);
        classes.entry(packed_canonical(&masks, n)).or_insert(masks);
        // advance the sequence as a base-n counter
        let mut pos = seq.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
        }
    }
    let mut reprs: Vec<(u32, [u16; MAX_N])> = classes.into_iter().collect();
    reprs.sort_unstable_by_key(|&(code, _)| code);
    reprs
        .into_iter()
        .map(|(_, masks)| {
            let mut edges = Vec::with_capacity(n - 1);
            for u in 0..n {
                let mut rest = masks[u] >> (u + 1);
                while rest != 0 {
                    let v = u + 1 + rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    edges.push((u, v));
                }
            }
            Tree::new(n, edges)
        })
        .collect()
}
