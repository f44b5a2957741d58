//! Empirical collision survey of word-trace signatures over all unlabeled
//! trees of a given size. The survey measures how well a finite word set
//! separates isomorphism classes; it reports collisions, it never assumes
//! there are none.

use serde::Serialize;

use crate::error::Result;
use crate::topology::Word;

use super::{all_unlabeled_trees, word_trace_signature};

/// Relative tolerance for declaring two trace signatures equal.
pub const SIGNATURE_TOLERANCE: f64 = 1e-6;

/// Survey output; serializes to the stable JSON layout consumed by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SurveyReport {
    pub n: usize,
    pub word_set: Vec<String>,
    pub tree_count: usize,
    pub pair_count: usize,
    pub collision_count: usize,
    /// Edge lists of every colliding (non-isomorphic, equal-signature) pair.
    pub collisions: Vec<(Vec<[usize; 2]>, Vec<[usize; 2]>)>,
}

impl SurveyReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("survey serializes")
    }
}

/// Enumerates all unlabeled trees on `n` vertices, computes their trace
/// signatures over `words` with powers `1..=max_power` (default: `n`), and
/// reports every pair of distinct trees whose signatures agree within
/// [`SIGNATURE_TOLERANCE`].
///
/// Deterministic: trees are enumerated in canonical order, so repeated runs
/// serialize byte-identically.
pub fn signature_collision_survey(
    n: usize,
    words: &[Word],
    max_power: Option<usize>,
) -> Result<SurveyReport> {
    let trees = all_unlabeled_trees(n)?;
    let max_power = max_power.unwrap_or(n).max(1);
    let signatures: Vec<_> = trees
        .iter()
        .map(|t| word_trace_signature(t, words, max_power))
        .collect();
    let mut collisions = Vec::new();
    for i in 0..trees.len() {
        for j in (i + 1)..trees.len() {
            if signatures[i].approx_eq(&signatures[j], SIGNATURE_TOLERANCE) {
                let edges = |t: &super::Tree| t.edges().iter().map(|&(u, v)| [u, v]).collect();
                collisions.push((edges(&trees[i]), edges(&trees[j])));
            }
        }
    }
    let tree_count = trees.len();
    Ok(SurveyReport {
        n,
        word_set: words.iter().map(|w| w.to_string()).collect(),
        tree_count,
        pair_count: tree_count * tree_count.saturating_sub(1) / 2,
        collision_count: collisions.len(),
        collisions,
    })
}
