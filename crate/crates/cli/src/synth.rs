//! Deterministic synthetic point-set generation: one anchor per class with a
//! guaranteed minimum pairwise separation, then per-set points as small
//! Gaussian perturbations projected back into the ball.

use hs2sd_core::{Curvature, Error, PointSetFile, SetRecord};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ANCHOR_ATTEMPTS: usize = 100_000;

pub struct SynthParams {
    pub classes: usize,
    pub sets_per_class: usize,
    pub points_per_set: usize,
    pub dimension: usize,
    pub curvature: f64,
    pub spread: f64,
    pub seed: u64,
    pub min_separation: f64,
}

// Box-Muller; consumes two uniforms per normal deviate
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn generate(params: &SynthParams) -> Result<PointSetFile, Error> {
    for (name, value) in [
        ("classes", params.classes),
        ("sets-per-class", params.sets_per_class),
        ("points-per-set", params.points_per_set),
        ("dimension", params.dimension),
    ] {
        if value == 0 {
            return Err(Error::InvalidParameter {
                detail: format!("--{name} must be at least 1"),
            });
        }
    }
    if !(params.spread.is_finite() && params.spread > 0.0) {
        return Err(Error::InvalidParameter {
            detail: format!("--spread must be positive, got {}", params.spread),
        });
    }
    if !(params.min_separation.is_finite() && params.min_separation >= 0.0) {
        return Err(Error::InvalidParameter {
            detail: format!("--min-separation must be nonnegative, got {}", params.min_separation),
        });
    }
    let curvature = Curvature::new(params.curvature)?;
    let radius = curvature.ball_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Anchors: uniform direction, norm in [0.15, 0.5] of the ball radius,
    // rejection-sampled until all pairwise Euclidean separations clear the
    // floor. The norm cap keeps the conformal metric factor below ~2.7 so
    // tightly-spread sets produce tame word products.
    let mut anchors: Vec<Vec<f64>> = Vec::with_capacity(params.classes);
    let floor = params.min_separation * radius;
    let mut attempts = 0;
    while anchors.len() < params.classes {
        attempts += 1;
        if attempts > ANCHOR_ATTEMPTS {
            return Err(Error::InvalidParameter {
                detail: format!(
                    "could not place {} anchors with separation {} of the ball radius; lower --min-separation",
                    params.classes, params.min_separation
                ),
            });
        }
        let direction: Vec<f64> = (0..params.dimension)
            .map(|_| standard_normal(&mut rng))
            .collect();
        let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        let target = (0.15 + 0.35 * rng.random::<f64>()) * radius;
        let candidate: Vec<f64> = direction.into_iter().map(|v| v / norm * target).collect();
        let separated = anchors.iter().all(|a| {
            let d2: f64 = a
                .iter()
                .zip(&candidate)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            d2.sqrt() >= floor
        });
        if separated {
            anchors.push(candidate);
        }
    }

    // spread is the rms displacement norm of a point from its anchor, in
    // absolute coordinate units
    let sigma = params.spread / (params.dimension as f64).sqrt();
    let mut sets = Vec::with_capacity(params.classes * params.sets_per_class);
    for (class, anchor) in anchors.iter().enumerate() {
        for set_idx in 0..params.sets_per_class {
            let points: Vec<Vec<f64>> = (0..params.points_per_set)
                .map(|_| {
                    anchor
                        .iter()
                        .map(|&a| a + sigma * standard_normal(&mut rng))
                        .collect()
                })
                .collect();
            sets.push(SetRecord {
                id: format!("class{class}-set{set_idx}"),
                label: Some(format!("class{class}")),
                points,
            });
        }
    }
    let file = PointSetFile::new(params.curvature, params.dimension, sets);
    // round-trip through the loader so every emitted point is ball-valid
    file.build_sets(None)?;
    Ok(file)
}
