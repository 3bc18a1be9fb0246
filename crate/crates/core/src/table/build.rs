use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use super::piece::{CurvePiece, Generator, Piece};
use super::rational::RationalAngleSpec;
use super::spline::PeriodicSpline;
use super::spec::TableSpec;
use super::{Table, TableError};
use crate::geom::{cross, signed_area, Vec2};

/// Index of the lowest, then leftmost, point (ties within a relative 1e-12).
fn lowest_leftmost(points: &[(f64, f64)]) -> usize {
    let scale = points
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let ymin = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * scale;
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if p.1 - ymin > tol {
            continue;
        }
        match best {
            Some(b) if points[b].0 <= p.0 => {}
            _ => best = Some(i),
        }
    }
    best.unwrap()
}

impl Table {
    /// Polygonal table through `vertices` (either orientation).
    pub fn build_polygon(vertices: &[Vec2]) -> Result<Table, TableError> {
        Self::polygon_with_rotation(vertices).map(|(t, _)| t)
    }

    /// Builds the polygon and reports which input vertex became vertex 0.
    pub(crate) fn polygon_with_rotation(vertices: &[Vec2]) -> Result<(Table, usize), TableError> {
        let n = vertices.len();
        if n < 3 {
            return Err(TableError::DegenerateInput(format!(
                "a polygon needs at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(TableError::DegenerateInput("non-finite vertex".into()));
        }
        let mut verts = vertices.to_vec();
        let area = signed_area(&verts);
        if area == 0.0 {
            return Err(TableError::DegenerateInput("zero enclosed area".into()));
        }
        let reversed = area < 0.0;
        if reversed {
            verts.reverse();
        }
        for i in 0..n {
            let a = verts[(i + n - 1) % n];
            let b = verts[i];
            let c = verts[(i + 1) % n];
            let (d1, d2) = (b - a, c - b);
            if d2.norm() == 0.0 {
                return Err(TableError::DegenerateInput(format!("zero-length edge at vertex {i}")));
            }
            if cross(&d1, &d2).abs() <= 1e-12 * d1.norm() * d2.norm() {
                return Err(TableError::DegenerateInput(format!(
                    "vertex {i} has a straight or zero interior angle"
                )));
            }
        }
        let keyed: Vec<(f64, f64)> = verts.iter().map(|v| (v.x, v.y)).collect();
        let first = lowest_leftmost(&keyed);
        verts.rotate_left(first);
        let pieces = (0..n)
            .map(|i| Piece::segment(verts[i], verts[(i + 1) % n]))
            .collect();
        let table = Table::normalized(pieces).map_err(|e| match e {
            TableError::SelfIntersecting => TableError::DegenerateInput("self-intersecting polygon".into()),
            other => other,
        })?;
        let original = if reversed { (n - 1 + n - first) % n } else { first };
        Ok((table, original))
    }

    /// Polygon with exact rational interior angles; the result carries the
    /// spec (rotated to the table's vertex order) as its rationality flag.
    pub fn build_rational_polygon(spec: &RationalAngleSpec) -> Result<Table, TableError> {
        let verts = spec.vertices()?;
        let (mut table, first) = Self::polygon_with_rotation(&verts)?;
        let mut stored = spec.rotated(first);
        let k = 1.0 / spec.side_lengths.iter().sum::<f64>();
        stored.side_lengths.iter_mut().for_each(|l| *l *= k);
        table.rational = Some(stored);
        Ok(table.with_source(TableSpec::RationalPolygon {
            angles: spec.angles.clone(),
            side_lengths: spec.side_lengths.clone(),
            anchor: spec.anchor,
        }))
    }

    /// Closed C² spline table through at least four control points.
    pub fn build_smooth_curve(control_points: &[Vec2]) -> Result<Table, TableError> {
        if control_points.len() < 4 {
            return Err(TableError::DegenerateInput(format!(
                "a spline table needs at least 4 control points, got {}",
                control_points.len()
            )));
        }
        let mut pts = control_points.to_vec();
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        let spline = PeriodicSpline::through(&pts)
            .ok_or_else(|| TableError::DegenerateInput("repeated control point".into()))?;
        let period = spline.period();
        let spline = Arc::new(spline);
        // Canonical start: lowest then leftmost point of the curve.
        let n = 4096;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let p = spline.jet(period * i as f64 / n as f64)[0];
                (p.x, p.y)
            })
            .collect();
        let i0 = lowest_leftmost(&samples);
        let mut u = period * i0 as f64 / n as f64;
        for _ in 0..20 {
            let [_, d1, d2, _] = spline.jet(u);
            if d2.y <= 0.0 {
                break;
            }
            let step = d1.y / d2.y;
            if step.abs() > period / n as f64 {
                break;
            }
            u -= step;
            if step.abs() < 1e-16 * period {
                break;
            }
        }
        let piece = CurvePiece::new(Generator::Spline(spline), u, u + period);
        Table::normalized(vec![Piece::Curve(piece)])
    }

    /// Round table of perimeter 1, centered at the origin.
    pub fn circle() -> Table {
        Table::normalized(vec![Piece::arc(Vec2::zeros(), 1.0, -FRAC_PI_2, TAU)])
            .expect("circle is a valid table")
            .with_source(TableSpec::Circle)
    }

    /// Ellipse with the given semi-axes (x then y), centered at the origin,
    /// rescaled to perimeter 1.
    pub fn ellipse(semi_x: f64, semi_y: f64) -> Result<Table, TableError> {
        if !(semi_x > 0.0 && semi_y > 0.0 && semi_x.is_finite() && semi_y.is_finite()) {
            return Err(TableError::DegenerateInput("ellipse semi-axes must be positive".into()));
        }
        let piece = CurvePiece::new(
            Generator::Ellipse { a: semi_x, b: semi_y },
            -FRAC_PI_2,
            -FRAC_PI_2 + TAU,
        );
        Ok(Table::normalized(vec![Piece::Curve(piece)])?.with_source(TableSpec::Ellipse {
            semi_axes: [semi_x, semi_y],
        }))
    }

    /// Square of side 1/4 with a corner at the origin.
    pub fn unit_square() -> Table {
        let v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        TableSpec::Polygon {
            vertices: v.iter().map(|&(x, y)| [x, y]).collect(),
        }
        .build()
        .expect("square is a valid table")
    }
}

/// Rotates a list of segments and arcs so the parametrization starts at the
/// lowest, then leftmost, boundary point, splitting an arc if needed.
pub(crate) fn canonical_rotation(mut pieces: Vec<Piece>) -> Vec<Piece> {
    let mut cands: Vec<(usize, f64, Vec2)> = Vec::new();
    for (k, p) in pieces.iter().enumerate() {
        cands.push((k, 0.0, p.start()));
        if let Piece::Arc(arc) = p {
            // Bottom of the supporting circle, if the arc passes through it.
            let sg = arc.sweep.signum();
            let alpha = (sg * (-FRAC_PI_2 - arc.start_angle)).rem_euclid(TAU);
            if alpha > 0.0 && alpha < arc.sweep.abs() {
                let s = alpha * arc.radius;
                cands.push((k, s, p.point(s)));
            }
        }
    }
    let keyed: Vec<(f64, f64)> = cands.iter().map(|c| (c.2.x, c.2.y)).collect();
    let (k, s, _) = cands[lowest_leftmost(&keyed)];
    if s > 0.0 && s < pieces[k].length() {
        let len = pieces[k].length();
        let head = pieces[k].sub(0.0, s);
        let tail = pieces[k].sub(s, len);
        pieces[k] = tail;
        pieces.insert(k, head);
        pieces.rotate_left(k + 1);
    } else {
        pieces.rotate_left(k);
    }
    pieces
}
