//! The combined set-to-set distance: a convex mix of the Einstein-midpoint
//! geodesic distance and the Thue-Morse topological distance,
//! `total = lambda * d_g + (1 - lambda) * d_t`.

use ndarray::Array2;
use rayon::prelude::*;

use crate::adapter::{lambda_adapter_forward, AdapterWeights};
use crate::error::{Error, Result};
use crate::geometry::PoincarePoint;
use crate::set::PointSet;
use crate::topology::{
    signature_distance, thue_morse_signature, ThueMorseSignature, TopologyGraph, DEFAULT_TM_TERMS,
};

/// How the balancing weight is chosen.
#[derive(Debug, Clone)]
pub enum LambdaMode {
    /// Fixed value in [0, 1].
    Fixed(f64),
    /// Computed per pair by the adapter network.
    Adapter(AdapterWeights),
}

#[derive(Debug, Clone)]
pub struct DistanceConfig {
    pub lambda: LambdaMode,
    /// Index of the last Thue-Morse word (`tm_terms + 1` words are used).
    pub tm_terms: usize,
    /// Row-normalize adjacency matrices before word evaluation.
    pub normalize_adjacency: bool,
    /// Re-order both sets canonically (by distance to their midpoints)
    /// before the order-sensitive topological component.
    pub canonical_order: bool,
    /// With an adapter, average lambda over both argument orders so the
    /// distance stays symmetric.
    pub symmetrize_lambda: bool,
}

impl DistanceConfig {
    pub fn fixed(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && (0.0..=1.0).contains(&lambda)) {
            return Err(Error::InvalidLambda { value: lambda });
        }
        Ok(DistanceConfig {
            lambda: LambdaMode::Fixed(lambda),
            tm_terms: DEFAULT_TM_TERMS,
            normalize_adjacency: false,
            canonical_order: false,
            symmetrize_lambda: false,
        })
    }

    pub fn adapter(weights: AdapterWeights) -> Self {
        DistanceConfig {
            lambda: LambdaMode::Adapter(weights),
            tm_terms: DEFAULT_TM_TERMS,
            normalize_adjacency: false,
            canonical_order: false,
            symmetrize_lambda: false,
        }
    }
}

/// Both components of one evaluation plus the weight actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub geodesic: f64,
    pub topological: f64,
    pub lambda: f64,
    pub total: f64,
}

/// Geodesic distance between the Einstein midpoints of two sets.
pub fn geodesic_set_distance(sx: &PointSet, sy: &PointSet) -> Result<f64> {
    sx.einstein_midpoint()?
        .geodesic_distance(&sy.einstein_midpoint()?)
}

fn resolve_lambda(sx: &PointSet, sy: &PointSet, cfg: &DistanceConfig) -> Result<f64> {
    match &cfg.lambda {
        LambdaMode::Fixed(l) => Ok(*l),
        LambdaMode::Adapter(w) => {
            let forward = lambda_adapter_forward(sx, sy, w)?;
            if cfg.symmetrize_lambda {
                Ok(0.5 * (forward + lambda_adapter_forward(sy, sx, w)?))
            } else {
                Ok(forward)
            }
        }
    }
}

/// Evaluates the combined distance.
///
/// The topological component requires equal cardinalities; it is skipped
/// (reported as 0) only when `lambda` is fixed at exactly 1 and the
/// cardinalities differ, matching the prototype-merging convention of the
/// classifier. Every other mismatch is an error.
pub fn hs2sd_distance(sx: &PointSet, sy: &PointSet, cfg: &DistanceConfig) -> Result<DistanceReport> {
    let (sx, sy) = if cfg.canonical_order {
        (sx.canonically_ordered()?, sy.canonically_ordered()?)
    } else {
        (sx.clone(), sy.clone())
    };
    let lambda = resolve_lambda(&sx, &sy, cfg)?;
    let geodesic = geodesic_set_distance(&sx, &sy)?;
    let skip_topology = matches!(cfg.lambda, LambdaMode::Fixed(l) if l == 1.0) && sx.len() != sy.len();
    let topological = if skip_topology {
        0.0
    } else {
        crate::topology::topological_distance(&sx, &sy, cfg.tm_terms, cfg.normalize_adjacency)?
    };
    Ok(DistanceReport {
        geodesic,
        topological,
        lambda,
        total: lambda * geodesic + (1.0 - lambda) * topological,
    })
}

/// Midpoint and Thue-Morse signature of one set, computed once and reused
/// across pair evaluations.
struct SetSummary {
    midpoint: PoincarePoint,
    signature: Option<ThueMorseSignature>,
    cardinality: usize,
}

fn summarize(set: &PointSet, cfg: &DistanceConfig, need_signature: bool) -> Result<SetSummary> {
    let set = if cfg.canonical_order {
        set.canonically_ordered()?
    } else {
        set.clone()
    };
    let signature = if need_signature {
        let mut g = TopologyGraph::from_point_set(&set)?;
        if cfg.normalize_adjacency {
            g = g.row_normalized();
        }
        Some(thue_morse_signature(&g, cfg.tm_terms)?)
    } else {
        None
    };
    Ok(SetSummary {
        midpoint: set.einstein_midpoint()?,
        signature,
        cardinality: set.len(),
    })
}

fn report_from_summaries(
    a: &SetSummary,
    b: &SetSummary,
    lambda: f64,
    skip_topology: bool,
) -> Result<DistanceReport> {
    let geodesic = a.midpoint.geodesic_distance(&b.midpoint)?;
    let topological = if skip_topology {
        0.0
    } else {
        match (&a.signature, &b.signature) {
            (Some(sa), Some(sb)) => signature_distance(sa, sb)?,
            _ => {
                return Err(Error::CardinalityMismatch {
                    left: a.cardinality,
                    right: b.cardinality,
                })
            }
        }
    };
    Ok(DistanceReport {
        geodesic,
        topological,
        lambda,
        total: lambda * geodesic + (1.0 - lambda) * topological,
    })
}

/// Dense matrix of pairwise combined distances: zero diagonal, symmetric
/// under a fixed lambda. Pairs are evaluated in parallel; on failure the
/// offending pair indices are named.
pub fn pairwise_distance_matrix(sets: &[PointSet], cfg: &DistanceConfig) -> Result<Array2<f64>> {
    let m = sets.len();
    if m == 0 {
        return Err(Error::EmptySet);
    }
    let lambda_is_one = matches!(cfg.lambda, LambdaMode::Fixed(l) if l == 1.0);
    let need_signature = !lambda_is_one;
    // per-set summaries are independent of each other
    let summaries = sets
        .par_iter()
        .map(|s| summarize(s, cfg, need_signature))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let annotate = |e: Error, i: usize, j: usize| Error::InvalidParameter {
        detail: format!("pair ({i},{j}): {e}"),
    };
    let entries: Vec<((usize, usize), f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let report = match &cfg.lambda {
                LambdaMode::Fixed(l) => {
                    report_from_summaries(&summaries[i], &summaries[j], *l, lambda_is_one)
                }
                LambdaMode::Adapter(_) => hs2sd_distance(&sets[i], &sets[j], cfg),
            }
            .map_err(|e| annotate(e, i, j))?;
            Ok(((i, j), report.total))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = Array2::zeros((m, m));
    for ((i, j), value) in entries {
        matrix[(i, j)] = value;
        matrix[(j, i)] = value;
    }
    // with an adapter the weight may depend on argument order; fill the
    // lower triangle independently in that case
    if matches!(cfg.lambda, LambdaMode::Adapter(_)) && !cfg.symmetrize_lambda {
        let lower: Vec<((usize, usize), f64)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let report = hs2sd_distance(&sets[j], &sets[i], cfg).map_err(|e| annotate(e, j, i))?;
                Ok(((j, i), report.total))
            })
            .collect::<Result<Vec<_>>>()?;
        for ((j, i), value) in lower {
            matrix[(j, i)] = value;
        }
    }
    Ok(matrix)
}

/// A point set carrying a class label.
#[derive(Debug, Clone)]
pub struct LabeledPointSet {
    pub label: String,
    pub set: PointSet,
}

/// Output of the nearest-prototype classifier.
#[derive(Debug, Clone)]
pub struct Classification {
    /// Distinct class labels in sorted order; columns of `logits`.
    pub class_labels: Vec<String>,
    /// Predicted label per query, in query order.
    pub predicted: Vec<String>,
    /// Negative combined distance of each query (row) to each class (column).
    pub logits: Array2<f64>,
    /// True whenever any query/prototype cardinality differed and the
    /// topological component was disabled (lambda forced to 1).
    pub lambda_forced_to_one: bool,
}

/// Classifies each query by the nearest class prototype under the combined
/// distance; logits are negated distances.
///
/// Multi-shot support sets of one class are merged into a single prototype
/// set. If any query/prototype cardinality pair differs, lambda is forced to
/// 1 for the whole call (the topological term is undefined across unequal
/// cardinalities). Ties go to the lowest class index.
pub fn nearest_prototype_classify(
    queries: &[PointSet],
    supports: &[LabeledPointSet],
    cfg: &DistanceConfig,
) -> Result<Classification> {
    if queries.is_empty() || supports.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut class_labels: Vec<String> = supports.iter().map(|s| s.label.clone()).collect();
    class_labels.sort();
    class_labels.dedup();

    let mut prototypes = Vec::with_capacity(class_labels.len());
    for label in &class_labels {
        let mut points = Vec::new();
        for s in supports.iter().filter(|s| &s.label == label) {
            points.extend(s.set.points().iter().cloned());
        }
        prototypes.push(PointSet::new(points)?);
    }

    let cardinality_mismatch = queries
        .iter()
        .flat_map(|q| prototypes.iter().map(move |p| (q.len(), p.len())))
        .any(|(a, b)| a != b);
    let effective = if cardinality_mismatch {
        let mut forced = cfg.clone();
        forced.lambda = LambdaMode::Fixed(1.0);
        forced
    } else {
        cfg.clone()
    };

    let lambda_is_one = matches!(effective.lambda, LambdaMode::Fixed(l) if l == 1.0);
    let query_summaries = queries
        .iter()
        .map(|q| summarize(q, &effective, !lambda_is_one))
        .collect::<Result<Vec<_>>>()?;
    let proto_summaries = prototypes
        .iter()
        .map(|p| summarize(p, &effective, !lambda_is_one))
        .collect::<Result<Vec<_>>>()?;

    let mut logits = Array2::zeros((queries.len(), prototypes.len()));
    let mut predicted = Vec::with_capacity(queries.len());
    for (qi, qs) in query_summaries.iter().enumerate() {
        let mut best = 0usize;
        let mut best_distance = f64::INFINITY;
        for (ci, ps) in proto_summaries.iter().enumerate() {
            let report = match &effective.lambda {
                LambdaMode::Fixed(l) => report_from_summaries(qs, ps, *l, lambda_is_one)?,
                LambdaMode::Adapter(_) => hs2sd_distance(&queries[qi], &prototypes[ci], &effective)?,
            };
            logits[(qi, ci)] = -report.total;
            if report.total < best_distance {
                best_distance = report.total;
                best = ci;
            }
        }
        predicted.push(class_labels[best].clone());
    }
    Ok(Classification {
        class_labels,
        predicted,
        logits,
        lambda_forced_to_one: cardinality_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curvature;

    fn set(rows: &[Vec<f64>], c: f64) -> PointSet {
        PointSet::from_rows(rows, Curvature::new(c).unwrap()).unwrap()
    }

    fn fixture_x() -> PointSet {
        set(&[vec![0.1, 0.2], vec![-0.3, 0.1], vec![0.2, -0.2]], 0.1)
    }

    fn fixture_y() -> PointSet {
        set(&[vec![0.0, 0.4], vec![0.25, 0.15], vec![-0.1, -0.35]], 0.1)
    }

    #[test]
    fn geodesic_set_distance_reference() {
        // 60-digit reference for the fixed five-point fixtures at c = 0.05
        let qx = set(
            &[
                vec![0.3, 0.1],
                vec![0.2, -0.4],
                vec![-0.1, 0.5],
                vec![0.0, 0.2],
                vec![0.4, -0.1],
            ],
            0.05,
        );
        let qy = set(
            &[
                vec![-0.2, 0.3],
                vec![0.1, 0.1],
                vec![-0.4, -0.2],
                vec![0.3, 0.3],
                vec![0.0, -0.5],
            ],
            0.05,
        );
        let d = geodesic_set_distance(&qx, &qy).unwrap();
        assert!((d - 0.4156410866857146).abs() < 1e-10, "d = {d}");
        assert!(geodesic_set_distance(&qx, &qx).unwrap() < 1e-12);
    }

    #[test]
    fn singleton_sets_reduce_to_point_distance() {
        let sx = set(&[vec![0.1, 0.3]], 0.2);
        let sy = set(&[vec![-0.2, 0.1]], 0.2);
        let expected = sx.points()[0].geodesic_distance(&sy.points()[0]).unwrap();
        let got = geodesic_set_distance(&sx, &sy).unwrap();
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn convex_combination_reference() {
        let cfg = DistanceConfig::fixed(0.3).unwrap();
        let report = hs2sd_distance(&fixture_x(), &fixture_y(), &cfg).unwrap();
        // independently verified component values
        assert!((report.geodesic - 0.11888052525421675).abs() < 1e-10);
        let dt_expected = 172350.92341478331;
        assert!((report.topological - dt_expected).abs() < 1e-8 * dt_expected);
        let expected_total = 0.3 * report.geodesic + 0.7 * report.topological;
        assert_eq!(report.total, expected_total);
        assert!((report.total - 120645.68205450589).abs() < 1e-7 * report.total);
    }

    #[test]
    fn lambda_endpoints_collapse() {
        let sx = fixture_x();
        let sy = fixture_y();
        let at = |l: f64| hs2sd_distance(&sx, &sy, &DistanceConfig::fixed(l).unwrap()).unwrap();
        let r1 = at(1.0);
        assert_eq!(r1.total, r1.geodesic);
        let r0 = at(0.0);
        assert_eq!(r0.total, r0.topological);
        // affine in lambda: midpoint equals average of endpoints
        let rm = at(0.5);
        assert!((rm.total - 0.5 * (r0.total + r1.total)).abs() <= 1e-12 * r0.total.max(1.0));
    }

    #[test]
    fn invalid_lambda_rejected() {
        assert!(matches!(
            DistanceConfig::fixed(1.5),
            Err(Error::InvalidLambda { .. })
        ));
        assert!(matches!(
            DistanceConfig::fixed(-0.1),
            Err(Error::InvalidLambda { .. })
        ));
    }

    #[test]
    fn lambda_one_tolerates_unequal_cardinalities() {
        let sx = fixture_x();
        let sy = set(&[vec![0.0, 0.1], vec![0.1, 0.0]], 0.1);
        let r = hs2sd_distance(&sx, &sy, &DistanceConfig::fixed(1.0).unwrap()).unwrap();
        assert_eq!(r.total, r.geodesic);
        assert_eq!(r.topological, 0.0);
        // any other lambda must refuse
        assert!(matches!(
            hs2sd_distance(&sx, &sy, &DistanceConfig::fixed(0.5).unwrap()),
            Err(Error::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn pairwise_matrix_matches_direct_calls() {
        let sets = vec![
            fixture_x(),
            fixture_y(),
            set(&[vec![0.3, 0.0], vec![0.0, 0.3], vec![-0.3, 0.0]], 0.1),
            set(&[vec![0.05, 0.05], vec![-0.05, 0.2], vec![0.2, 0.1]], 0.1),
        ];
        let cfg = DistanceConfig::fixed(0.4).unwrap();
        let matrix = pairwise_distance_matrix(&sets, &cfg).unwrap();
        for i in 0..4 {
            assert_eq!(matrix[(i, i)], 0.0);
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let direct = hs2sd_distance(&sets[i], &sets[j], &cfg).unwrap().total;
                let rel = (matrix[(i, j)] - direct).abs() / direct.max(1.0);
                assert!(rel < 1e-12, "entry ({i},{j})");
                assert!((matrix[(i, j)] - matrix[(j, i)]).abs() <= 1e-12 * direct.max(1.0));
            }
        }
        let single = pairwise_distance_matrix(&sets[..1], &cfg).unwrap();
        assert_eq!(single[(0, 0)], 0.0);
    }

    #[test]
    fn classify_prefers_identical_support() {
        let a = fixture_x();
        let b = fixture_y();
        let supports = vec![
            LabeledPointSet {
                label: "a".into(),
                set: a.clone(),
            },
            LabeledPointSet {
                label: "b".into(),
                set: b.clone(),
            },
        ];
        let cfg = DistanceConfig::fixed(0.5).unwrap();
        let out = nearest_prototype_classify(std::slice::from_ref(&a), &supports, &cfg).unwrap();
        assert_eq!(out.predicted, vec!["a".to_string()]);
        assert_eq!(out.logits[(0, 0)], 0.0);
        assert!(!out.lambda_forced_to_one);
    }

    #[test]
    fn classify_tie_breaks_to_lowest_class_index() {
        let q = set(&[vec![0.0, 0.0]], 0.1);
        let left = set(&[vec![0.2, 0.0]], 0.1);
        let right = set(&[vec![-0.2, 0.0]], 0.1);
        let supports = vec![
            LabeledPointSet {
                label: "z_far".into(),
                set: right,
            },
            LabeledPointSet {
                label: "a_near".into(),
                set: left,
            },
        ];
        let cfg = DistanceConfig::fixed(1.0).unwrap();
        let out = nearest_prototype_classify(&[q], &supports, &cfg).unwrap();
        // both classes sit at the same distance; sorted order puts a_near first
        assert_eq!(out.predicted, vec!["a_near".to_string()]);
    }

    #[test]
    fn classify_forces_lambda_one_on_multi_shot_merges() {
        let q = set(&[vec![0.0, 0.05], vec![0.05, 0.0]], 0.1);
        let shot1 = set(&[vec![0.0, 0.1], vec![0.1, 0.0]], 0.1);
        let shot2 = set(&[vec![0.02, 0.1], vec![0.1, 0.02]], 0.1);
        let far = set(&[vec![0.4, 0.4], vec![0.45, 0.35], vec![0.35, 0.45], vec![0.4, 0.45]], 0.1);
        let supports = vec![
            LabeledPointSet {
                label: "near".into(),
                set: shot1,
            },
            LabeledPointSet {
                label: "near".into(),
                set: shot2,
            },
            LabeledPointSet {
                label: "far".into(),
                set: far,
            },
        ];
        let cfg = DistanceConfig::fixed(0.5).unwrap();
        let out = nearest_prototype_classify(&[q], &supports, &cfg).unwrap();
        assert!(out.lambda_forced_to_one);
        assert_eq!(out.predicted, vec!["near".to_string()]);
    }

    #[test]
    fn adapter_mode_keeps_decomposition_identity() {
        let w = AdapterWeights::random(2, 4, 11);
        let cfg = DistanceConfig::adapter(w);
        let report = hs2sd_distance(&fixture_x(), &fixture_y(), &cfg).unwrap();
        assert!(report.lambda > 0.0 && report.lambda < 1.0);
        let recomputed = report.lambda * report.geodesic + (1.0 - report.lambda) * report.topological;
        assert!((report.total - recomputed).abs() <= 1e-12 * report.total.max(1.0));
    }

    #[test]
    fn symmetrized_adapter_averages_both_directions() {
        let w = AdapterWeights::random(2, 4, 11);
        let sx = fixture_x();
        let sy = fixture_y();
        let fwd = crate::adapter::lambda_adapter_forward(&sx, &sy, &w).unwrap();
        let bwd = crate::adapter::lambda_adapter_forward(&sy, &sx, &w).unwrap();
        let mut cfg = DistanceConfig::adapter(w);
        cfg.symmetrize_lambda = true;
        let ab = hs2sd_distance(&sx, &sy, &cfg).unwrap();
        let ba = hs2sd_distance(&sy, &sx, &cfg).unwrap();
        assert_eq!(ab.lambda, 0.5 * (fwd + bwd));
        assert!((ab.total - ba.total).abs() <= 1e-10 * ab.total.max(1.0));
    }
}
