//! Hyperbolic set-to-set distance toolkit.
//!
//! The combined distance between two sets of Poincare-ball points mixes a
//! global term (geodesic distance of their Einstein midpoints) with a local
//! term (average Frobenius difference of Thue-Morse matrix-word evaluations
//! on their pairwise-distance graphs):
//!
//! ```text
//! total = lambda * d_g + (1 - lambda) * d_t
//! ```
//!
//! Alongside the distance itself the crate ships the supporting machinery:
//! Poincare/Klein geometry, the word combinatorics, a tree-spectra
//! verification suite with brute-force oracles, and Gromov
//! delta-hyperbolicity estimation.

pub mod adapter;
pub mod delta;
pub mod distance;
pub mod error;
pub mod files;
pub mod geometry;
pub mod set;
pub mod topology;
pub mod trees;

pub use adapter::{lambda_adapter_forward, AdapterWeights};
pub use delta::{delta_hyperbolicity, gromov_product, DeltaEstimate, DeltaMode, MetricMatrix};
pub use distance::{
    geodesic_set_distance, hs2sd_distance, nearest_prototype_classify, pairwise_distance_matrix,
    Classification, DistanceConfig, DistanceReport, LabeledPointSet, LambdaMode,
};
pub use error::{Error, ErrorClass, Result};
pub use files::{PointSetFile, SetRecord};
pub use geometry::{
    einstein_midpoint, project_to_ball, Curvature, KleinPoint, PoincarePoint, DEFAULT_BALL_MARGIN,
};
pub use set::PointSet;
pub use topology::{
    build_topology_graph, evaluate_word, is_overlap_free, thue_morse_signature, thue_morse_words,
    topological_distance, Letter, ThueMorseSignature, TopologyGraph, Word, DEFAULT_TM_TERMS,
};
pub use trees::{
    all_unlabeled_trees, brute_force_isomorphic, cospectral, distance_matrix_stack,
    signature_collision_survey, tree_center, word_trace_signature, DistanceMatrixStack,
    SurveyReport, TraceSignature, Tree,
};
