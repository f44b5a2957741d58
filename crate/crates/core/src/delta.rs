//! Gromov delta-hyperbolicity of finite metric spaces via the four-point
//! condition: for each quadruple the three pairwise distance sums are
//! formed and the quadruple contributes `(largest - median) / 2`; delta is
//! the maximum contribution. Tree metrics give exactly zero.

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::set::PointSet;

/// Cap for the exact O(n^4) scan.
pub const EXACT_SCAN_LIMIT: usize = 60;
/// Tolerance for the triangle-inequality check on construction.
pub const METRIC_TOLERANCE: f64 = 1e-6;

/// A validated finite metric: symmetric, zero diagonal, nonnegative, and
/// triangle inequality within [`METRIC_TOLERANCE`].
#[derive(Debug, Clone)]
pub struct MetricMatrix {
    d: Array2<f64>,
}

impl MetricMatrix {
    pub fn new(d: Array2<f64>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return Err(Error::InvalidMetric {
                detail: format!("matrix must be square, got {}x{}", n, d.ncols()),
            });
        }
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(Error::InvalidMetric {
                    detail: format!("diagonal entry ({i},{i}) is {}", d[(i, i)]),
                });
            }
            for j in 0..n {
                let v = d[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMetric {
                        detail: format!("entry ({i},{j}) = {v} is not a finite nonnegative real"),
                    });
                }
                if v != d[(j, i)] {
                    return Err(Error::InvalidMetric {
                        detail: format!("entries ({i},{j}) and ({j},{i}) differ"),
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let excess = d[(i, k)] - d[(i, j)] - d[(j, k)];
                    if excess > METRIC_TOLERANCE {
                        return Err(Error::MetricViolation { i, j, k, excess });
                    }
                }
            }
        }
        Ok(MetricMatrix { d })
    }

    /// Pairwise geodesic distances of a point set.
    pub fn from_point_set(set: &PointSet) -> Result<Self> {
        let n = set.len();
        let pts = set.points();
        let mut d = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v = pts[i].geodesic_distance(&pts[j])?;
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        Self::new(d)
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.d
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales every distance by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                detail: format!("scale must be positive and finite, got {s}"),
            });
        }
        Ok(MetricMatrix {
            d: self.d.mapv(|v| v * s),
        })
    }
}

/// Gromov product `(x|y)_base = (d(base,x) + d(base,y) - d(x,y)) / 2`.
pub fn gromov_product(metric: &MetricMatrix, x: usize, y: usize, base: usize) -> Result<f64> {
    let n = metric.n();
    for idx in [x, y, base] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, size: n });
        }
    }
    Ok((metric.get(base, x) + metric.get(base, y) - metric.get(x, y)) / 2.0)
}

/// How to scan quadruples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaMode {
    /// All `C(n,4)` quadruples; capped at [`EXACT_SCAN_LIMIT`] points.
    Exact,
    /// `samples` random quadruples drawn with `seed`; yields a lower bound.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// "exact" or "sampled".
    pub mode: String,
    pub quadruples_evaluated: u64,
    /// `2 * delta / diameter` when the diameter is positive.
    pub relative: Option<f64>,
}

#[inline]
fn four_point_defect(d: &Array2<f64>, x: usize, y: usize, z: usize, w: usize) -> f64 {
    let s1 = d[(x, y)] + d[(z, w)];
    let s2 = d[(x, z)] + d[(y, w)];
    let s3 = d[(x, w)] + d[(y, z)];
    let max = s1.max(s2).max(s3);
    let min = s1.min(s2).min(s3);
    let median = s1 + s2 + s3 - max - min;
    (max - median) / 2.0
}

/// Four-point delta of a metric. `n < 4` gives delta = 0 with zero
/// quadruples evaluated.
pub fn delta_hyperbolicity(metric: &MetricMatrix, mode: DeltaMode) -> Result<DeltaEstimate> {
    let n = metric.n();
    let diameter = metric.diameter();
    let relative = |delta: f64| (diameter > 0.0).then(|| 2.0 * delta / diameter);
    if n < 4 {
        return Ok(DeltaEstimate {
            delta: 0.0,
            mode: match mode {
                DeltaMode::Exact => "exact".into(),
                DeltaMode::Sampled { .. } => "sampled".into(),
            },
            quadruples_evaluated: 0,
            relative: relative(0.0),
        });
    }
    match mode {
        DeltaMode::Exact => {
            if n > EXACT_SCAN_LIMIT {
                return Err(Error::SizeLimit {
                    what: "exact delta scan",
                    limit: EXACT_SCAN_LIMIT,
                    got: n,
                });
            }
            let d = metric.matrix();
            // parallel over the first index; max-reduction is order-free
            let delta = (0..n - 3)
                .into_par_iter()
                .map(|x| {
                    let mut local = 0.0_f64;
                    for y in (x + 1)..n {
                        for z in (y + 1)..n {
                            for w in (z + 1)..n {
                                local = local.max(four_point_defect(d, x, y, z, w));
                            }
                        }
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            let count = (n as u64 * (n as u64 - 1) * (n as u64 - 2) * (n as u64 - 3)) / 24;
            Ok(DeltaEstimate {
                delta,
                mode: "exact".into(),
                quadruples_evaluated: count,
                relative: relative(delta),
            })
        }
        DeltaMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter {
                    detail: "sampled mode needs at least one sample".into(),
                });
            }
            let d = metric.matrix();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut delta = 0.0_f64;
            for _ in 0..samples {
                let mut idx = [0usize; 4];
                let mut filled = 0;
                while filled < 4 {
                    let candidate = rng.random_range(0..n);
                    if !idx[..filled].contains(&candidate) {
                        idx[filled] = candidate;
                        filled += 1;
                    }
                }
                delta = delta.max(four_point_defect(d, idx[0], idx[1], idx[2], idx[3]));
            }
            Ok(DeltaEstimate {
                delta,
                mode: "sampled".into(),
                quadruples_evaluated: samples as u64,
                relative: relative(delta),
            })
        }
    }
}
