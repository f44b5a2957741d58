//! Ordered collections of Poincare points sharing one geometry.

use crate::error::{Error, Result};
use crate::geometry::{einstein_midpoint, Curvature, PoincarePoint};

/// A nonempty ordered set of points with common dimension and curvature.
///
/// Order is significant: the topological distance depends on it. Use
/// [`PointSet::canonically_ordered`] for an order-free comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    id: Option<String>,
    points: Vec<PoincarePoint>,
}

impl PointSet {
    pub fn new(points: Vec<PoincarePoint>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        let curvature = first.curvature();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            if p.curvature() != curvature {
                return Err(Error::CurvatureMismatch {
                    left: curvature.get(),
                    right: p.curvature().get(),
                });
            }
        }
        Ok(PointSet { id: None, points })
    }

    pub fn with_id(points: Vec<PoincarePoint>, id: impl Into<String>) -> Result<Self> {
        let mut set = Self::new(points)?;
        set.id = Some(id.into());
        Ok(set)
    }

    /// Builds a set from raw coordinate rows, projecting each into the ball.
    pub fn from_rows(rows: &[Vec<f64>], curvature: Curvature) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| PoincarePoint::new(r.clone(), curvature))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn points(&self) -> &[PoincarePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() // never true; sets are nonempty by construction
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn curvature(&self) -> Curvature {
        self.points[0].curvature()
    }

    pub fn einstein_midpoint(&self) -> Result<PoincarePoint> {
        einstein_midpoint(&self.points)
    }

    /// Returns a copy sorted by geodesic distance to the set's Einstein
    /// midpoint, ties broken lexicographically on coordinates.
    pub fn canonically_ordered(&self) -> Result<Self> {
        let mid = self.einstein_midpoint()?;
        let mut keyed: Vec<(f64, &PoincarePoint)> = self
            .points
            .iter()
            .map(|p| Ok((mid.geodesic_distance(p)?, p)))
            .collect::<Result<Vec<_>>>()?;
        keyed.sort_by(|(da, pa), (db, pb)| {
            da.partial_cmp(db)
                .expect("distances are finite")
                .then_with(|| {
                    pa.coords()
                        .iter()
                        .zip(pb.coords())
                        .find_map(|(a, b)| {
                            let ord = a.partial_cmp(b).expect("coords are finite");
                            (ord != std::cmp::Ordering::Equal).then_some(ord)
                        })
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        let points = keyed.into_iter().map(|(_, p)| p.clone()).collect();
        Ok(PointSet {
            id: self.id.clone(),
            points,
        })
    }
}
