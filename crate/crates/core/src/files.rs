//! The point-set JSON container and the 12-significant-digit float policy
//! used by every serialized output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::set::PointSet;

pub const POINT_SET_FORMAT_VERSION: u32 = 1;

/// Rounds to 12 significant decimal digits; applied to every float before
/// serialization so outputs are byte-stable golden-file material.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// One named set in a file: id, optional class label, raw coordinate rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub points: Vec<Vec<f64>>,
}

/// On-disk container: shared curvature and dimension plus the sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetFile {
    pub format_version: u32,
    pub curvature: f64,
    pub dimension: usize,
    pub sets: Vec<SetRecord>,
}

impl PointSetFile {
    pub fn new(curvature: f64, dimension: usize, sets: Vec<SetRecord>) -> Self {
        PointSetFile {
            format_version: POINT_SET_FORMAT_VERSION,
            curvature,
            dimension,
            sets,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PointSetFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != POINT_SET_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: POINT_SET_FORMAT_VERSION,
                got: self.format_version,
            });
        }
        Curvature::new(self.curvature)?;
        if self.dimension == 0 {
            return Err(Error::InvalidParameter {
                detail: "dimension must be at least 1".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for set in &self.sets {
            if !seen.insert(&set.id) {
                return Err(Error::DuplicateSetId {
                    id: set.id.clone(),
                });
            }
            if set.points.is_empty() {
                return Err(Error::InvalidParameter {
                    detail: format!("set {:?} has no points", set.id),
                });
            }
            for (row, point) in set.points.iter().enumerate() {
                if point.len() != self.dimension {
                    return Err(Error::InvalidParameter {
                        detail: format!(
                            "set {:?} row {row} has {} coordinates, file declares dimension {}",
                            set.id,
                            point.len(),
                            self.dimension
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Index of a set by id.
    pub fn find(&self, id: &str) -> Result<usize> {
        self.sets
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownSetId { id: id.to_string() })
    }

    /// Builds every set, projecting points into the ball. A curvature
    /// override reinterprets the raw coordinates under the new curvature.
    pub fn build_sets(&self, curvature_override: Option<f64>) -> Result<Vec<PointSet>> {
        let curvature = Curvature::new(curvature_override.unwrap_or(self.curvature))?;
        self.sets
            .iter()
            .map(|rec| {
                let points = rec
                    .points
                    .iter()
                    .map(|row| crate::geometry::PoincarePoint::new(row.clone(), curvature))
                    .collect::<Result<Vec<_>>>()?;
                PointSet::with_id(points, rec.id.clone())
            })
            .collect()
    }

    /// Deterministic serialization with all floats rounded to 12
    /// significant digits.
    pub fn to_json_string(&self) -> String {
        let rounded = PointSetFile {
            format_version: self.format_version,
            curvature: round_sig12(self.curvature),
            dimension: self.dimension,
            sets: self
                .sets
                .iter()
                .map(|s| SetRecord {
                    id: s.id.clone(),
                    label: s.label.clone(),
                    points: s
                        .points
                        .iter()
                        .map(|row| row.iter().map(|&v| round_sig12(v)).collect())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&rounded).expect("point-set file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PointSetFile {
        PointSetFile::new(
            0.1,
            2,
            vec![
                SetRecord {
                    id: "a".into(),
                    label: Some("left".into()),
                    points: vec![vec![0.1, 0.2], vec![-0.3, 0.1]],
                },
                SetRecord {
                    id: "b".into(),
                    label: None,
                    points: vec![vec![0.0, 0.4]],
                },
            ],
        )
    }

    #[test]
    fn round_trip_and_determinism() {
        let text = sample().to_json_string();
        let parsed = PointSetFile::from_json_str(&text).unwrap();
        assert_eq!(parsed.to_json_string(), text);
        let sets = parsed.build_sets(None).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].id(), Some("a"));
        assert_eq!(sets[0].len(), 2);
    }

    #[test]
    fn sig12_rounding() {
        assert_eq!(round_sig12(0.1 + 0.2), 0.3);
        assert_eq!(round_sig12(0.0), 0.0);
        assert_eq!(round_sig12(1234567890123456.0), 1234567890120000.0);
    }

    #[test]
    fn validation_catches_bad_files() {
        let mut f = sample();
        f.format_version = 9;
        assert!(matches!(
            PointSetFile::from_json_str(&serde_json::to_string(&f).unwrap()),
            Err(Error::FormatVersion { expected: 1, got: 9 })
        ));
        let mut f = sample();
        f.sets[1].id = "a".into();
        assert!(matches!(
            PointSetFile::from_json_str(&serde_json::to_string(&f).unwrap()),
            Err(Error::DuplicateSetId { .. })
        ));
        let mut f = sample();
        f.sets[0].points[0].push(0.5);
        assert!(PointSetFile::from_json_str(&serde_json::to_string(&f).unwrap()).is_err());
        assert!(matches!(
            sample().find("zzz"),
            Err(Error::UnknownSetId { .. })
        ));
    }

    #[test]
    fn curvature_override_changes_geometry() {
        let f = sample();
        let base = f.build_sets(None).unwrap();
        let overridden = f.build_sets(Some(0.9)).unwrap();
        assert_ne!(
            base[0].curvature().get(),
            overridden[0].curvature().get()
        );
    }
}
