//! JSON table definition files.
//!
//! ```json
//! {"kind": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
//! {"kind": "smoothed_polygon", "vertices": [...], "fillet_radius": 0.04}
//! {"kind": "rational_polygon", "angles": [[1, 3], [1, 3], [1, 3]], "side_lengths": [1, 1, 1]}
//! {"kind": "spline", "control_points": [[...], ...]}
//! {"kind": "circle"}
//! {"kind": "ellipse", "semi_axes": [2, 1]}
//! ```
//!
//! Lengths are given before normalization; loading always rescales to
//! perimeter 1.

use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::rational::{Anchor, RationalAngleSpec};
use super::{Table, TableError};
use crate::geom::Vec2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    RationalPolygon {
        angles: Vec<Ratio<i64>>,
        side_lengths: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<Anchor>,
    },
    Spline {
        control_points: Vec<[f64; 2]>,
    },
    SmoothedPolygon {
        vertices: Vec<[f64; 2]>,
        /// Fillet radius in the units of `vertices`.
        fillet_radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corner_subset: Option<Vec<usize>>,
    },
    Circle,
    Ellipse {
        semi_axes: [f64; 2],
    },
}

fn points(v: &[[f64; 2]]) -> Vec<Vec2> {
    v.iter().map(|p| Vec2::new(p[0], p[1])).collect()
}

impl TableSpec {
    pub fn build(&self) -> Result<Table, TableError> {
        let table = match self {
            TableSpec::Polygon { vertices } => Table::build_polygon(&points(vertices))?,
            TableSpec::RationalPolygon {
                angles,
                side_lengths,
                anchor,
            } => Table::build_rational_polygon(&RationalAngleSpec {
                angles: angles.clone(),
                side_lengths: side_lengths.clone(),
                anchor: *anchor,
            })?,
            TableSpec::Spline { control_points } => Table::build_smooth_curve(&points(control_points))?,
            TableSpec::SmoothedPolygon {
                vertices,
                fillet_radius,
                corner_subset,
            } => {
                let pts = points(vertices);
                let poly = Table::build_polygon(&pts)?;
                let raw_perimeter: f64 = (0..pts.len())
                    .map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm())
                    .sum();
                poly.smooth_corners(fillet_radius / raw_perimeter, corner_subset.as_deref())?
            }
            TableSpec::Circle => Table::circle(),
            TableSpec::Ellipse { semi_axes } => Table::ellipse(semi_axes[0], semi_axes[1])?,
        };
        Ok(table.with_source(self.clone()))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table spec serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed table file {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

impl Table {
    /// Reads and builds a table definition file.
    pub fn load(path: impl AsRef<Path>) -> Result<Table, LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let spec = TableSpec::from_json(&text).map_err(|source| LoadError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        Ok(spec.build()?)
    }

    /// Writes the definition this table was built from.
    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let spec = self.source.as_ref().ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "table has no constructor definition to save",
            )
        })?;
        std::fs::write(path, spec.to_json())
    }
}
