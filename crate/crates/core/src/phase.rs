//! Phase points and the billiard map.
//!
//! A phase point is a boundary parameter with a unit direction on the outward
//! side of the tangent line. The map reflects the direction across the tangent
//! line (making it point inward) and follows the ray to the next boundary hit,
//! which becomes the new base point; the ray direction, now pointing outward
//! there, is kept as the new direction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{reflect_across, wrap, Vec2};
use crate::table::{Table, TableError};

/// Rays leaving within this of the tangent line count as grazing.
pub const TOL_TANGENT: f64 = 1e-8;
/// Hits this close (in arc length) to a corner are rejected.
pub const CORNER_GUARD: f64 = 1e-7;
/// Minimal chord length.
pub const T_MIN: f64 = 1e-9;
/// Allowed inward component of a phase direction.
pub const FIBER_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("parameter {0} is a corner")]
    AtCorner(f64),
    #[error("direction points into the table (outward component {0})")]
    NotInFiber(f64),
    #[error("ray hits the boundary {distance:e} from a corner at s = {s}")]
    HitCorner { s: f64, distance: f64 },
    #[error("ray meets the boundary tangentially at s = {s} (normal component {normal:e})")]
    GrazingRay { s: f64, normal: f64 },
    #[error("ray from s = {0} found no boundary crossing")]
    NoIntersection(f64),
}

impl From<TableError> for PhaseError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::AtCorner { param } => PhaseError::AtCorner(param),
            other => panic!("unexpected table error {other}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub v: Vec2,
}

impl PhasePoint {
    pub fn new(s: f64, v: Vec2) -> Self {
        Self { s, v }
    }

    /// Direction at angle `phi` from the tangent, measured toward the outward
    /// normal; the fiber is `phi` in `[0, pi]`.
    pub fn from_angle(table: &Table, s: f64, phi: f64) -> Result<Self, PhaseError> {
        let f = table.evaluate(s)?;
        let v = phi.cos() * f.tangent + phi.sin() * f.outward_normal();
        Ok(Self { s, v })
    }

    /// Angle from the tangent toward the outward normal, in `(-pi, pi]`.
    pub fn angle(&self, table: &Table) -> f64 {
        let f = table.frame_unchecked(self.s);
        self.v.dot(&f.outward_normal()).atan2(self.v.dot(&f.tangent))
    }
}

/// Outward normal and the two tangent directions bounding the fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fiber {
    pub outward_normal: Vec2,
    pub bounds: [Vec2; 2],
}

impl Fiber {
    pub fn contains(&self, v: &Vec2) -> bool {
        v.dot(&self.outward_normal) >= -FIBER_SLACK
    }
}

pub fn admissible_directions(table: &Table, s: f64) -> Result<Fiber, PhaseError> {
    let f = table.evaluate(s)?;
    Ok(Fiber {
        outward_normal: f.outward_normal(),
        bounds: [f.tangent, -f.tangent],
    })
}

/// First boundary crossing of the ray `origin + t dir`, `t > T_MIN`, as
/// `(t, s)`. `from` is the parameter of the origin when it lies on the
/// boundary.
pub(crate) fn trace(table: &Table, origin: &Vec2, dir: &Vec2, from: Option<f64>) -> Option<(f64, f64)> {
    let per = table.perimeter();
    let offsets = table.offsets();
    let pieces = table.pieces();
    let mut best: Option<(f64, f64)> = None;
    for (k, piece) in pieces.iter().enumerate() {
        let len = piece.length();
        let exclude = from.and_then(|s| {
            let local = s - offsets[k];
            let slack = 1e-12 * per;
            if local >= -slack && local <= len + slack {
                Some(local.clamp(0.0, len))
            } else if k == 0 && per - s <= slack {
                Some(0.0)
            } else if k + 1 == pieces.len() && s <= slack {
                Some(len)
            } else {
                None
            }
        });
        for (t, local) in piece.ray_hits(origin, dir, T_MIN, exclude) {
            if best.is_none_or(|b| t < b.0) {
                best = Some((t, wrap(offsets[k] + local, per)));
            }
        }
    }
    best
}

/// One step of the billiard map.
pub fn billiard_map(table: &Table, p: &PhasePoint) -> Result<PhasePoint, PhaseError> {
    let f = table.evaluate(p.s)?;
    let n_out = f.outward_normal();
    let normal = p.v.dot(&n_out);
    if normal < -FIBER_SLACK {
        return Err(PhaseError::NotInFiber(normal));
    }
    if normal.abs() < TOL_TANGENT {
        return Ok(*p);
    }
    let w = reflect_across(&p.v, &f.tangent);
    let w = w / w.norm();
    let (_, s) = trace(table, &f.point, &w, Some(p.s)).ok_or(PhaseError::NoIntersection(p.s))?;
    let distance = table.corner_distance(s);
    if distance < CORNER_GUARD {
        return Err(PhaseError::HitCorner { s, distance });
    }
    let g = table.frame_unchecked(s);
    let normal = w.dot(&g.outward_normal());
    if normal.abs() < TOL_TANGENT {
        return Err(PhaseError::GrazingRay { s, normal });
    }
    if normal < 0.0 {
        return Err(PhaseError::NoIntersection(p.s));
    }
    Ok(PhasePoint { s, v: w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    HitCorner,
    Grazing,
    StepLimit,
    NoIntersection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Starting point followed by one entry per completed bounce.
    pub points: Vec<PhasePoint>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn bounces(&self) -> usize {
        self.points.len() - 1
    }
}

fn step_outcome(table: &Table, p: &PhasePoint) -> Result<PhasePoint, Termination> {
    match billiard_map(table, p) {
        // A tangential direction is a fixed point of the map, never an orbit.
        Ok(q) if q == *p => Err(Termination::Grazing),
        Ok(q) => Ok(q),
        Err(PhaseError::HitCorner { .. }) => Err(Termination::HitCorner),
        Err(PhaseError::GrazingRay { .. }) => Err(Termination::Grazing),
        Err(PhaseError::AtCorner(_)) => Err(Termination::HitCorner),
        Err(PhaseError::NotInFiber(_)) | Err(PhaseError::NoIntersection(_)) => {
            Err(Termination::NoIntersection)
        }
    }
}

/// Applies the map up to `n` times, stopping at corners and tangencies.
pub fn iterate(table: &Table, p: &PhasePoint, n: usize) -> Trajectory {
    let mut points = vec![*p];
    for _ in 0..n {
        match step_outcome(table, points.last().unwrap()) {
            Ok(q) => points.push(q),
            Err(termination) => return Trajectory { points, termination },
        }
    }
    Trajectory {
        points,
        termination: Termination::Completed,
    }
}

/// Iterates until the orbit comes back to the starting phase point (within
/// `tol` in position and direction), or gives up after `max_steps`.
pub fn iterate_until_return(table: &Table, p: &PhasePoint, max_steps: usize, tol: f64) -> Trajectory {
    let x0 = table.point(p.s);
    let mut points = vec![*p];
    for _ in 0..max_steps {
        match step_outcome(table, points.last().unwrap()) {
            Ok(q) => {
                let back = (table.point(q.s) - x0).norm() <= tol && (q.v - p.v).norm() <= tol;
                points.push(q);
                if back {
                    return Trajectory {
                        points,
                        termination: Termination::Completed,
                    };
                }
            }
            Err(termination) => return Trajectory { points, termination },
        }
    }
    Trajectory {
        points,
        termination: Termination::StepLimit,
    }
}
