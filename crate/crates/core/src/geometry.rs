//! Poincare-ball primitives: Mobius addition, geodesic distance, Klein
//! conversions, Lorentz factors and the Einstein midpoint.
//!
//! Curvature is stored as a positive magnitude `c`; the ball has radius
//! `1/sqrt(c)` and a point is valid when `c * ||x||^2 < 1`. With that
//! convention the Mobius addition reads
//!
//! ```text
//! x (+) y = ((1 + 2c<x,y> + c|y|^2) x + (1 - c|x|^2) y)
//!           / (1 + 2c<x,y> + c^2 |x|^2 |y|^2)
//! ```
//!
//! and the geodesic distance is `(2/sqrt(c)) * atanh(sqrt(c) * |(-x) (+) y|)`.
//!
//! All constructors route raw coordinates through [`project_to_ball`] so that
//! values held by the library always satisfy the ball invariant.

use crate::error::{Error, Result};

/// Default radial safety margin used by point constructors: coordinates with
/// `sqrt(c) * norm > 1 - margin` are rescaled back onto that shell.
pub const DEFAULT_BALL_MARGIN: f64 = 1e-5;

/// Clamp ceiling for the `atanh` argument in distance computations.
const ATANH_CLAMP: f64 = 1.0 - 1e-12;
/// Largest relative change the clamp may introduce before we refuse and
/// report a boundary point instead.
const ATANH_CLAMP_REL_TOL: f64 = 1e-6;

/// Positive curvature magnitude of a hyperbolic ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature(f64);

impl Curvature {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidCurvature { value: c });
        }
        Ok(Curvature(c))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Radius `1/sqrt(c)` of the ball.
    pub fn ball_radius(self) -> f64 {
        1.0 / self.0.sqrt()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

fn check_finite(coords: &[f64], what: &'static str) -> Result<()> {
    if coords.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

fn lorentz_factor_impl(coords: &[f64], c: f64) -> Result<f64> {
    let s = c * norm_sq(coords);
    if s >= 1.0 {
        return Err(Error::BoundaryPoint {
            scaled_norm: s.sqrt(),
        });
    }
    Ok(1.0 / (1.0 - s).sqrt())
}

/// A point strictly inside the curvature-`c` Poincare ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint {
    coords: Vec<f64>,
    curvature: Curvature,
}

/// A point of the Klein ball sharing the curvature convention.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinPoint {
    coords: Vec<f64>,
    curvature: Curvature,
}

/// Projects raw coordinates into the ball: interior points pass through
/// unchanged, anything at or beyond the `1 - margin` shell is radially
/// rescaled to norm `(1 - margin) / sqrt(c)`.
pub fn project_to_ball(coords: Vec<f64>, curvature: Curvature, margin: f64) -> Result<PoincarePoint> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidMargin { value: margin });
    }
    check_finite(&coords, "project_to_ball input")?;
    if coords.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "point dimension must be at least 1".into(),
        });
    }
    let c = curvature.get();
    let n2 = norm_sq(&coords);
    let limit = 1.0 - margin;
    if c * n2 < limit * limit {
        return Ok(PoincarePoint { coords, curvature });
    }
    let norm = n2.sqrt();
    let target = limit / c.sqrt();
    let scale = if norm > 0.0 { target / norm } else { 0.0 };
    let coords = coords.into_iter().map(|v| v * scale).collect();
    Ok(PoincarePoint { coords, curvature })
}

impl PoincarePoint {
    /// Builds a point, projecting with [`DEFAULT_BALL_MARGIN`].
    pub fn new(coords: Vec<f64>, curvature: Curvature) -> Result<Self> {
        project_to_ball(coords, curvature, DEFAULT_BALL_MARGIN)
    }

    pub fn origin(dim: usize, curvature: Curvature) -> Result<Self> {
        Self::new(vec![0.0; dim.max(1)], curvature)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The additive inverse `-x` (the Mobius inverse of `x`).
    pub fn neg(&self) -> Self {
        PoincarePoint {
            coords: self.coords.iter().map(|v| -v).collect(),
            curvature: self.curvature,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if self.curvature != other.curvature {
            return Err(Error::CurvatureMismatch {
                left: self.curvature.get(),
                right: other.curvature.get(),
            });
        }
        Ok(())
    }

    /// Mobius addition `self (+) rhs`; the result is projected back into the
    /// ball with the default margin.
    pub fn mobius_add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let raw = mobius_add_raw(&self.coords, &rhs.coords, self.curvature.get());
        check_finite(&raw, "mobius_add result")?;
        PoincarePoint::new(raw, self.curvature)
    }

    /// Geodesic distance `(2/sqrt(c)) * atanh(sqrt(c) * |(-x) (+) y|)`.
    ///
    /// The `atanh` argument is clamped to `1 - 1e-12`; if the clamp would
    /// change it by more than `1e-6` relative the point pair is reported as
    /// numerically on the boundary.
    pub fn geodesic_distance(&self, rhs: &Self) -> Result<f64> {
        self.check_compatible(rhs)?;
        let c = self.curvature.get();
        let neg: Vec<f64> = self.coords.iter().map(|v| -v).collect();
        let diff = mobius_add_raw(&neg, &rhs.coords, c);
        check_finite(&diff, "geodesic_distance")?;
        let arg = c.sqrt() * norm_sq(&diff).sqrt();
        let clamped = arg.min(ATANH_CLAMP);
        if arg > clamped && (arg - clamped) / arg > ATANH_CLAMP_REL_TOL {
            return Err(Error::BoundaryPoint { scaled_norm: arg });
        }
        Ok(2.0 / c.sqrt() * clamped.atanh())
    }

    /// Maps to the Klein ball: `u = 2x / (1 + c|x|^2)`.
    pub fn to_klein(&self) -> KleinPoint {
        let c = self.curvature.get();
        let f = 2.0 / (1.0 + c * norm_sq(&self.coords));
        KleinPoint {
            coords: self.coords.iter().map(|v| f * v).collect(),
            curvature: self.curvature,
        }
    }

    /// Lorentz factor `1/sqrt(1 - c|x|^2)` of the stored coordinates.
    pub fn lorentz_factor(&self) -> Result<f64> {
        lorentz_factor_impl(&self.coords, self.curvature.get())
    }
}

fn mobius_add_raw(x: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let xy = dot(x, y);
    let x2 = norm_sq(x);
    let y2 = norm_sq(y);
    let coeff_x = 1.0 + 2.0 * c * xy + c * y2;
    let coeff_y = 1.0 - c * x2;
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    x.iter()
        .zip(y)
        .map(|(xi, yi)| (coeff_x * xi + coeff_y * yi) / den)
        .collect()
}

impl KleinPoint {
    /// Validates `c |u|^2 <= 1` and wraps the coordinates.
    pub fn new(coords: Vec<f64>, curvature: Curvature) -> Result<Self> {
        check_finite(&coords, "KleinPoint")?;
        let s = curvature.get() * norm_sq(&coords);
        if s > 1.0 {
            return Err(Error::OutsideKleinBall { scaled_norm_sq: s });
        }
        Ok(KleinPoint { coords, curvature })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// Maps back to the Poincare ball: `x = u / (1 + sqrt(1 - c|u|^2))`.
    pub fn to_poincare(&self) -> Result<PoincarePoint> {
        let c = self.curvature.get();
        let s = c * norm_sq(&self.coords);
        if s > 1.0 {
            return Err(Error::OutsideKleinBall { scaled_norm_sq: s });
        }
        let f = 1.0 / (1.0 + (1.0 - s).sqrt());
        PoincarePoint::new(self.coords.iter().map(|v| f * v).collect(), self.curvature)
    }

    /// Lorentz factor of the Klein coordinates; this is the weight used by
    /// the Einstein midpoint.
    pub fn lorentz_factor(&self) -> Result<f64> {
        lorentz_factor_impl(&self.coords, self.curvature.get())
    }
}

/// Einstein midpoint of a nonempty slice of points: map to Klein, average
/// with Lorentz-factor weights, map back.
///
/// Summation runs left to right over the given order, so the result is
/// deterministic; permutation invariance holds to floating-point tolerance.
pub fn einstein_midpoint(points: &[PoincarePoint]) -> Result<PoincarePoint> {
    let first = points.first().ok_or(Error::EmptySet)?;
    let dim = first.dim();
    let curvature = first.curvature();
    let mut weighted = vec![0.0; dim];
    let mut total = 0.0;
    for p in points {
        first.check_compatible(p)?;
        let u = p.to_klein();
        let gamma = u.lorentz_factor()?;
        for (acc, ui) in weighted.iter_mut().zip(u.coords()) {
            *acc += gamma * ui;
        }
        total += gamma;
    }
    let mean: Vec<f64> = weighted.into_iter().map(|v| v / total).collect();
    KleinPoint::new(mean, curvature)?.to_poincare()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Curvature {
        Curvature::new(v).unwrap()
    }

    fn pt(coords: &[f64], cv: f64) -> PoincarePoint {
        PoincarePoint::new(coords.to_vec(), c(cv)).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
        }
    }

    #[test]
    fn curvature_rejects_nonpositive() {
        assert!(Curvature::new(0.0).is_err());
        assert!(Curvature::new(-0.1).is_err());
        assert!(Curvature::new(f64::NAN).is_err());
        assert!(Curvature::new(f64::INFINITY).is_err());
    }

    #[test]
    fn mobius_identity_and_inverse() {
        let x = pt(&[0.3, -0.2, 0.1], 0.2);
        let zero = PoincarePoint::origin(3, c(0.2)).unwrap();
        let sum = zero.mobius_add(&x).unwrap();
        assert_close(sum.coords(), x.coords(), 1e-15);
        let back = x.neg().mobius_add(&x).unwrap();
        assert_close(back.coords(), &[0.0; 3], 1e-15);
    }

    // Reference value from a 60-digit evaluation of the closed form.
    #[test]
    fn mobius_reference_value() {
        let x = pt(&[0.3, 0.0], 0.1);
        let y = pt(&[0.0, 0.4], 0.1);
        let sum = x.mobius_add(&y).unwrap();
        assert_close(
            sum.coords(),
            &[0.3047561151194228, 0.3963429266185669],
            1e-15,
        );
    }

    #[test]
    fn distance_reference_value() {
        let x = pt(&[0.3, 0.0], 0.1);
        let y = pt(&[0.0, 0.4], 0.1);
        let d = x.geodesic_distance(&y).unwrap();
        assert!((d - 1.008386771742828).abs() < 1e-13);
        assert!((d - y.geodesic_distance(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn distance_from_origin_is_closed_form() {
        let x = pt(&[0.1, -0.25, 0.3], 0.05);
        let zero = PoincarePoint::origin(3, c(0.05)).unwrap();
        let norm = norm_sq(x.coords()).sqrt();
        let expected = 2.0 / 0.05_f64.sqrt() * (0.05_f64.sqrt() * norm).atanh();
        assert!((zero.geodesic_distance(&x).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn distance_self_is_zero() {
        let x = pt(&[0.4, 0.1], 1.0);
        assert!(x.geodesic_distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn distance_flat_limit() {
        let x = pt(&[0.1, 0.0], 1e-8);
        let y = pt(&[0.0, 0.1], 1e-8);
        let d = x.geodesic_distance(&y).unwrap();
        let euclid = 2.0 * (0.02_f64).sqrt();
        assert!((d / euclid - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mismatches_are_rejected() {
        let x = pt(&[0.1, 0.2], 0.1);
        let y = pt(&[0.1, 0.2, 0.0], 0.1);
        let z = pt(&[0.1, 0.2], 0.2);
        assert!(matches!(
            x.geodesic_distance(&y),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            x.mobius_add(&z),
            Err(Error::CurvatureMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(matches!(
            PoincarePoint::new(vec![f64::NAN, 0.0], c(0.1)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn klein_reference_and_round_trip() {
        let x = pt(&[0.5, 0.0], 0.1);
        let u = x.to_klein();
        assert_close(u.coords(), &[0.975609756097561, 0.0], 1e-15);
        let back = u.to_poincare().unwrap();
        assert_close(back.coords(), x.coords(), 1e-12);
        let zero = PoincarePoint::origin(2, c(0.1)).unwrap();
        assert_close(zero.to_klein().coords(), &[0.0, 0.0], 0.0);
    }

    #[test]
    fn klein_rejects_outside_ball() {
        assert!(matches!(
            KleinPoint::new(vec![4.0, 0.0], c(0.1)),
            Err(Error::OutsideKleinBall { .. })
        ));
    }

    #[test]
    fn lorentz_factor_rejects_rim_vectors() {
        // a Klein vector exactly on the rim has an infinite Lorentz factor
        let rim = KleinPoint::new(vec![2.0, 0.0], c(0.25)).unwrap();
        assert!(matches!(
            rim.lorentz_factor(),
            Err(Error::BoundaryPoint { .. })
        ));
    }

    #[test]
    fn lorentz_factor_values() {
        let zero = PoincarePoint::origin(2, c(0.3)).unwrap();
        assert!((zero.lorentz_factor().unwrap() - 1.0).abs() < 1e-15);
        // c = 0.25, |x| = 1 -> 1/sqrt(0.75)
        let x = pt(&[1.0, 0.0], 0.25);
        assert!((x.lorentz_factor().unwrap() - 1.1547005383792515).abs() < 1e-14);
        // monotone in the norm at fixed curvature
        let a = pt(&[0.2, 0.0], 0.25);
        let b = pt(&[0.5, 0.0], 0.25);
        assert!(a.lorentz_factor().unwrap() < b.lorentz_factor().unwrap());
    }

    #[test]
    fn projection_behaviour() {
        let inside = project_to_ball(vec![0.1, 0.1], c(1.0), 1e-5).unwrap();
        assert_close(inside.coords(), &[0.1, 0.1], 0.0);

        // norm 2/sqrt(c) is rescaled to (1 - margin)/sqrt(c), direction kept
        let cv = c(0.25);
        let far = project_to_ball(vec![4.0, 0.0], cv, 1e-5).unwrap();
        let expected = (1.0 - 1e-5) / 0.25_f64.sqrt();
        assert!((far.coords()[0] - expected).abs() < 1e-12);
        assert_eq!(far.coords()[1], 0.0);

        let zero = project_to_ball(vec![0.0, 0.0], cv, 1e-5).unwrap();
        assert_close(zero.coords(), &[0.0, 0.0], 0.0);

        assert!(matches!(
            project_to_ball(vec![0.1], c(1.0), 0.0),
            Err(Error::InvalidMargin { .. })
        ));
        assert!(matches!(
            project_to_ball(vec![0.1], c(1.0), 1.0),
            Err(Error::InvalidMargin { .. })
        ));
    }

    #[test]
    fn midpoint_of_singleton_and_antipodal_pair() {
        let x = pt(&[0.3, -0.1], 0.1);
        let mid = einstein_midpoint(std::slice::from_ref(&x)).unwrap();
        assert_close(mid.coords(), x.coords(), 1e-14);

        let pair = [x.clone(), x.neg()];
        let mid = einstein_midpoint(&pair).unwrap();
        assert_close(mid.coords(), &[0.0, 0.0], 1e-12);
    }

    // Reference value from a 60-digit step-by-step evaluation of the
    // Klein-average pipeline.
    #[test]
    fn midpoint_reference_value() {
        let pts = [
            pt(&[0.1, 0.2, -0.1], 0.1),
            pt(&[-0.2, 0.05, 0.3], 0.1),
            pt(&[0.0, -0.25, 0.2], 0.1),
            pt(&[0.3, 0.1, 0.0], 0.1),
            pt(&[-0.15, -0.1, -0.2], 0.1),
        ];
        let mid = einstein_midpoint(&pts).unwrap();
        assert_close(
            mid.coords(),
            &[
                0.009787394234052327,
                -0.00008453614213182956,
                0.04005734664874423,
            ],
            1e-10,
        );
    }

    #[test]
    fn midpoint_empty_set_errors() {
        assert!(matches!(einstein_midpoint(&[]), Err(Error::EmptySet)));
    }
}
