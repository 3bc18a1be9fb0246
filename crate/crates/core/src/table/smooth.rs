use super::build::canonical_rotation;
use super::piece::Piece;
use super::spec::TableSpec;
use super::{Table, TableError};
use crate::geom::{left_normal, signed_angle};

impl Table {
    /// Replaces the selected corners (all when `subset` is `None`) by circular
    /// fillets of the given radius tangent to both adjacent sides, then
    /// rescales to perimeter 1.
    ///
    /// Only corners between two straight sides can be filleted. Corner indices
    /// refer to [`Table::corners`].
    pub fn smooth_corners(&self, radius: f64, subset: Option<&[usize]>) -> Result<Table, TableError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(TableError::InvalidParameter(format!("fillet radius {radius}")));
        }
        if self.corners.is_empty() {
            return Err(TableError::DegenerateInput("table has no corners".into()));
        }
        let n = self.pieces.len();
        let mut fillet_at = vec![false; n];
        let selected: Vec<usize> = match subset {
            Some(s) => s.to_vec(),
            None => (0..self.corners.len()).collect(),
        };
        for &ci in &selected {
            let corner = self.corners.get(ci).ok_or_else(|| {
                TableError::InvalidParameter(format!("corner index {ci} out of range"))
            })?;
            let k = self
                .offsets
                .iter()
                .position(|o| (o - corner.param).abs() <= 1e-15)
                .expect("corner sits at a piece junction")
                % n;
            let prev = (k + n - 1) % n;
            if !matches!(self.pieces[k], Piece::Segment(_)) || !matches!(self.pieces[prev], Piece::Segment(_)) {
                return Err(TableError::DegenerateInput(format!(
                    "corner {ci} is not between two straight sides"
                )));
            }
            fillet_at[k] = true;
        }
        // Tangent length of each fillet along its two sides.
        let trim: Vec<f64> = (0..n)
            .map(|k| {
                if !fillet_at[k] {
                    return 0.0;
                }
                let prev = &self.pieces[(k + n - 1) % n];
                let t_in = prev.frame(0.0).tangent;
                let t_out = self.pieces[k].frame(0.0).tangent;
                radius * (0.5 * signed_angle(&t_in, &t_out).abs()).tan()
            })
            .collect();
        for k in 0..n {
            let used = trim[k] + trim[(k + 1) % n];
            let len = self.pieces[k].length();
            if used >= len {
                return Err(TableError::RadiusTooLarge {
                    radius,
                    reason: format!("fillets need {used} of a side of length {len}"),
                });
            }
        }
        let mut pieces = Vec::with_capacity(2 * n);
        for k in 0..n {
            let side = &self.pieces[k];
            let t_out = side.frame(0.0).tangent;
            if fillet_at[k] {
                let prev = &self.pieces[(k + n - 1) % n];
                let t_in = prev.frame(0.0).tangent;
                let turn = signed_angle(&t_in, &t_out);
                let vertex = side.start();
                let entry = vertex - trim[k] * t_in;
                let center = entry + turn.signum() * radius * left_normal(&t_in);
                let r = entry - center;
                pieces.push(Piece::arc(center, radius, r.y.atan2(r.x), turn));
            }
            let len = side.length();
            pieces.push(side.sub(trim[k], len - trim[(k + 1) % n]));
        }
        // Close the tiny gaps left by independent trig evaluation at fillet ends.
        let m = pieces.len();
        for i in 0..m {
            let next_start = pieces[(i + 1) % m].start();
            if let Piece::Segment(seg) = &mut pieces[i] {
                seg.b = next_start;
            }
        }
        for i in 0..m {
            let prev_end = pieces[(i + m - 1) % m].end();
            if let Piece::Segment(seg) = &mut pieces[i] {
                seg.a = prev_end;
            }
        }
        let table = Table::normalized(canonical_rotation(pieces))?;
        Ok(match &self.source {
            Some(TableSpec::Polygon { vertices }) => {
                let n = vertices.len();
                let raw: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum();
                table.with_source(TableSpec::SmoothedPolygon {
                    vertices: vertices.clone(),
                    fillet_radius: radius * raw,
                    corner_subset: subset.map(<[usize]>::to_vec),
                })
            }
            _ => table,
        })
    }
}
