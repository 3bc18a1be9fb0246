//! Billiard tables: closed, simple, counterclockwise, piecewise-C¹ curves
//! parametrized by arc length and normalized to perimeter 1.
//!
//! A table is immutable once built. Every constructor rescales its raw
//! geometry by a homothety centered at the origin so the perimeter is 1, and
//! (except for perturbations, which keep the parameter origin of the table they
//! modify) starts the parametrization at the lowest, then leftmost, point.

mod approx;
mod arclength;
mod build;
mod curvature_bump;
mod perturb;
mod piece;
mod rational;
mod smooth;
mod spec;
mod spline;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use thiserror::Error;

pub use approx::{ApproxOptions, RationalApproximation};
pub use curvature_bump::{BumpProfile, CurvatureBump};
pub use perturb::Perturbation;
pub use piece::Frame;
pub use rational::{Anchor, RationalAngleSpec};
pub use spec::TableSpec;

use crate::geom::{cross, segments_intersect, signed_angle, signed_area, wrap, Vec2};
use piece::Piece;

/// Tangent directions closer than this (radians) are treated as continuous.
const CORNER_ANGLE_TOL: f64 = 1e-9;
/// Parameters this close to a corner count as the corner itself in `evaluate`.
pub const AT_CORNER_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("side lengths do not close up with the given angles: {0}")]
    NonClosing(String),
    #[error("boundary curve intersects itself")]
    SelfIntersecting,
    #[error("fillet radius {radius} too large: {reason}")]
    RadiusTooLarge { radius: f64, reason: String },
    #[error("tolerance {tol} not reached within {cap} vertices")]
    TolTooSmall { tol: f64, cap: usize },
    #[error("parameter {param} is a corner: tangent undefined")]
    AtCorner { param: f64 },
    #[error("bump support [{lo}, {hi}] contains a corner or a previous perturbation")]
    SupportHitsCorner { lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A corner of the boundary with its one-sided unit tangents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub param: f64,
    pub point: Vec2,
    pub incoming: Vec2,
    pub outgoing: Vec2,
}

impl Corner {
    /// Signed turning angle from the incoming to the outgoing tangent.
    pub fn turning(&self) -> f64 {
        signed_angle(&self.incoming, &self.outgoing)
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pieces: Vec<Piece>,
    offsets: Vec<f64>,
    corners: Vec<Corner>,
    rational: Option<RationalAngleSpec>,
    source: Option<TableSpec>,
    fingerprint: u64,
}

impl Table {
    /// Rescales `pieces` to perimeter 1 and validates the result.
    pub(crate) fn normalized(pieces: Vec<Piece>) -> Result<Table, TableError> {
        let total: f64 = pieces.iter().map(Piece::length).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(TableError::DegenerateInput("zero perimeter".into()));
        }
        let k = 1.0 / total;
        Self::assemble(pieces.iter().map(|p| p.scaled(k)).collect())
    }

    pub(crate) fn assemble(pieces: Vec<Piece>) -> Result<Table, TableError> {
        let n = pieces.len();
        if n == 0 {
            return Err(TableError::DegenerateInput("no boundary pieces".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0.0);
        for p in &pieces {
            let len = p.length();
            if !(len > 0.0) {
                return Err(TableError::DegenerateInput("zero-length boundary piece".into()));
            }
            offsets.push(offsets.last().unwrap() + len);
        }
        let perimeter = offsets[n];
        for k in 0..n {
            let gap = (pieces[k].end() - pieces[(k + 1) % n].start()).norm();
            if gap > 1e-12 * perimeter.max(1.0) {
                return Err(TableError::DegenerateInput(format!(
                    "pieces {k} and {} are not contiguous (gap {gap:e})",
                    (k + 1) % n
                )));
            }
        }
        let mut corners = Vec::new();
        for k in 0..n {
            let prev = &pieces[(k + n - 1) % n];
            let incoming = prev.frame(prev.length()).tangent;
            let outgoing = pieces[k].frame(0.0).tangent;
            if signed_angle(&incoming, &outgoing).abs() > CORNER_ANGLE_TOL {
                corners.push(Corner {
                    param: offsets[k],
                    point: pieces[k].start(),
                    incoming,
                    outgoing,
                });
            }
        }
        let mut table = Table {
            pieces,
            offsets,
            corners,
            rational: None,
            source: None,
            fingerprint: 0,
        };
        let poly = table.polyline();
        if !polyline_is_simple(&poly) {
            return Err(TableError::SelfIntersecting);
        }
        if signed_area(&poly) <= 0.0 {
            return Err(TableError::DegenerateInput(
                "boundary is not counterclockwise".into(),
            ));
        }
        table.fingerprint = table.compute_fingerprint();
        Ok(table)
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.perimeter().to_bits().hash(&mut h);
        self.pieces.len().hash(&mut h);
        for i in 0..64 {
            let p = self.point(self.perimeter() * i as f64 / 64.0);
            p.x.to_bits().hash(&mut h);
            p.y.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Stable identifier derived from the boundary geometry.
    pub fn id(&self) -> String {
        format!("{:016x}", self.fingerprint)
    }

    pub fn perimeter(&self) -> f64 {
        self.offsets[self.pieces.len()]
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// All corners with their one-sided tangents; empty for C¹ tables.
    pub fn corner_set(&self) -> Vec<Corner> {
        self.corners.clone()
    }

    pub fn corner_params(&self) -> Vec<f64> {
        self.corners.iter().map(|c| c.param).collect()
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    pub fn rational_spec(&self) -> Option<&RationalAngleSpec> {
        self.rational.as_ref()
    }

    /// Constructor input this table was built from, when it has one.
    pub fn source(&self) -> Option<&TableSpec> {
        self.source.as_ref()
    }

    pub(crate) fn with_source(mut self, source: TableSpec) -> Self {
        self.source = Some(source);
        self
    }

    /// True when every piece is a straight segment.
    pub fn is_polygon(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Segment(_)))
    }

    /// Vertices of a polygonal table, in boundary order.
    pub fn vertices(&self) -> Option<Vec<Vec2>> {
        self.is_polygon()
            .then(|| self.pieces.iter().map(Piece::start).collect())
    }

    /// Distance in parameter space to the nearest corner (infinite if none).
    pub fn corner_distance(&self, s: f64) -> f64 {
        let per = self.perimeter();
        self.corners
            .iter()
            .map(|c| crate::geom::circular_distance(c.param, s, per))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn locate(&self, s: f64) -> (usize, f64) {
        let s = wrap(s, self.perimeter());
        let n = self.pieces.len();
        let k = match self.offsets.binary_search_by(|o| o.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => (i - 1).min(n - 1),
        };
        (k, (s - self.offsets[k]).min(self.pieces[k].length()))
    }

    /// Parameters where one boundary piece ends and the next begins.
    pub fn junction_params(&self) -> Vec<f64> {
        self.offsets[..self.pieces.len()].to_vec()
    }

    pub(crate) fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Boundary point; defined everywhere including corners.
    pub fn point(&self, s: f64) -> Vec2 {
        let (k, local) = self.locate(s);
        self.pieces[k].point(local)
    }

    /// Point, unit tangent and signed curvature at a non-corner parameter.
    ///
    /// Curvature is positive where the boundary bends toward the interior.
    pub fn evaluate(&self, s: f64) -> Result<Frame, TableError> {
        if self.corner_distance(s) <= AT_CORNER_TOL {
            return Err(TableError::AtCorner { param: s });
        }
        Ok(self.frame_unchecked(s))
    }

    /// Frame using the outgoing side at corners.
    pub fn frame_unchecked(&self, s: f64) -> Frame {
        let (k, local) = self.locate(s);
        self.pieces[k].frame(local)
    }

    /// Frame using the incoming side at corners and piece junctions.
    pub(crate) fn frame_before(&self, s: f64) -> Frame {
        let per = self.perimeter();
        let s = wrap(s, per);
        let n = self.pieces.len();
        for k in 0..=n {
            let o = if k == 0 { per } else { self.offsets[k] };
            if (s - o).abs() <= AT_CORNER_TOL || (k == 0 && s <= AT_CORNER_TOL) {
                let prev = if k == 0 { n - 1 } else { k - 1 };
                let p = &self.pieces[prev];
                return p.frame(p.length());
            }
        }
        self.frame_unchecked(s)
    }

    /// Nearest boundary parameter to `p` (Newton-refined from a dense scan).
    pub fn project(&self, p: &Vec2) -> f64 {
        let per = self.perimeter();
        let n = 4096;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let s = per * i as f64 / n as f64;
            let d = (self.point(s) - p).norm_squared();
            if d < best.0 {
                best = (d, s);
            }
        }
        let h = per / n as f64;
        let (mut lo, mut hi) = (best.1 - h, best.1 + h);
        // Golden-section on the squared distance inside the bracketing cell.
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let dist = |s: f64| (self.point(s) - p).norm_squared();
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (dist(x1), dist(x2));
        for _ in 0..120 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = dist(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = dist(x2);
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        let mut s = 0.5 * (lo + hi);
        // Polish with Newton on (x(s) - p) . t(s) = 0 away from corners.
        for _ in 0..5 {
            if self.corner_distance(s) < 1e-12 {
                break;
            }
            let f = self.frame_unchecked(s);
            let r = f.point - p;
            let g1 = r.dot(&f.tangent);
            let g2 = 1.0 + f.curvature * r.dot(&f.inward_normal());
            if g2.abs() < 1e-12 {
                break;
            }
            let step = g1 / g2;
            if step.abs() > h {
                break;
            }
            s -= step;
        }
        wrap(s, per)
    }

    /// Dense closed polyline through the boundary.
    pub fn polyline(&self) -> Vec<Vec2> {
        self.pieces.iter().flat_map(Piece::polyline).collect()
    }

    /// Copy of this table enlarged by the homothety `x -> k x`, keeping the
    /// same relative parametrization (its perimeter becomes `k`).
    pub fn with_homothety(&self, k: f64) -> Result<Table, TableError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(TableError::InvalidParameter(format!("homothety ratio {k}")));
        }
        let mut t = Self::assemble(self.pieces.iter().map(|p| p.scaled(k)).collect())?;
        t.rational = self.rational.clone();
        Ok(t)
    }

    /// Exact rational-angle check for rational tables: the stored fractions
    /// sum to `n - 2` and each measured corner angle matches its fraction of pi.
    pub fn check_rational_angles(&self, tol: f64) -> bool {
        let Some(spec) = &self.rational else {
            return false;
        };
        if spec.validate_angles().is_err() || spec.angles.len() != self.corners.len() {
            return false;
        }
        self.corners.iter().zip(&spec.angles).all(|(c, a)| {
            let interior = std::f64::consts::PI - c.turning();
            let expected = std::f64::consts::PI * (*a.numer() as f64) / (*a.denom() as f64);
            (interior - expected).abs() <= tol
        })
    }

    /// Total absolute turning of the tangent along smooth stretches.
    pub(crate) fn smooth_turning(&self, samples_per_piece: usize) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let len = p.length();
                let mut acc = 0.0;
                let mut prev = p.frame(0.0).tangent;
                for i in 1..=samples_per_piece {
                    let t = p.frame(len * i as f64 / samples_per_piece as f64).tangent;
                    acc += signed_angle(&prev, &t).abs();
                    prev = t;
                }
                acc
            })
            .sum()
    }
}

pub(crate) fn polyline_is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    let bbox = |(a, b): (Vec2, Vec2)| (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y));
    let mut order: Vec<usize> = (0..n).collect();
    let boxes: Vec<_> = (0..n).map(|i| bbox(seg(i))).collect();
    order.sort_by(|&i, &j| boxes[i].0.partial_cmp(&boxes[j].0).unwrap());
    for (oi, &i) in order.iter().enumerate() {
        let bi = boxes[i];
        for &j in &order[oi + 1..] {
            let bj = boxes[j];
            if bj.0 > bi.1 {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent || bj.2 > bi.3 || bj.3 < bi.2 {
                continue;
            }
            let (p1, p2) = seg(i);
            let (q1, q2) = seg(j);
            if segments_intersect(&p1, &p2, &q1, &q2) {
                return false;
            }
        }
    }
    // Adjacent segments may only share their common endpoint.
    (0..n).all(|i| {
        let (a, b) = seg(i);
        let (_, c) = seg((i + 1) % n);
        let d1 = b - a;
        let d2 = c - b;
        !(cross(&d1, &d2).abs() <= 1e-15 * d1.norm() * d2.norm() && d1.dot(&d2) < 0.0)
    })
}

#[cfg(test)]
mod tests;
