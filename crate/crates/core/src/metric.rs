//! Hausdorff distance between sampled unit tangent bundles.
//!
//! A table is sampled as a finite set of (point, unit tangent) pairs and two
//! samples are compared under the product metric
//! `d((x, u), (y, v)) = max(|x - y|, |u - v|)`.
//!
//! Besides the `n` equispaced parameters and the two one-sided tangents at
//! each corner, the sample fills in corner fans (directions between the two
//! one-sided tangents) and refines curved stretches so that consecutive
//! tangents never turn by more than `4 pi / n`. Without that, a sharp corner
//! and a tiny fillet look far apart in the tangent fiber at any `n`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{signed_angle, Vec2};
use crate::table::Table;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("bundle sample needs n >= 4, got {0}")]
    TooFewSamples(usize),
    #[error("empty bundle sample")]
    EmptySample,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BundlePoint {
    pub x: Vec2,
    pub u: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleSample {
    pub points: Vec<BundlePoint>,
    pub n: usize,
    pub table_id: String,
}

impl BundleSample {
    pub fn from_points(points: Vec<BundlePoint>, table_id: impl Into<String>) -> Self {
        Self {
            n: points.len(),
            points,
            table_id: table_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn rotate(v: &Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Samples the unit tangent bundle of `table` with base resolution `n >= 4`.
pub fn sample_unit_tangent_bundle(table: &Table, n: usize) -> Result<BundleSample, MetricError> {
    if n < 4 {
        return Err(MetricError::TooFewSamples(n));
    }
    let per = table.perimeter();
    let max_turn = 4.0 * PI / n as f64;
    let corner_params = table.corner_params();
    let is_corner = |s: f64| table.corner_distance(s) <= crate::table::AT_CORNER_TOL;

    // Parameters of the smooth samples, in boundary order.
    let mut params: Vec<f64> = (0..n)
        .map(|k| (k as f64 + 0.5) / n as f64 * per)
        .filter(|&s| !is_corner(s))
        .collect();
    let junctions = table.junction_params();
    if junctions.len() > 1 {
        params.extend(junctions.iter().copied().filter(|&s| !is_corner(s)));
    }
    params.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Break points of the boundary walk: smooth samples plus corners.
    enum Node {
        Smooth(f64),
        Corner(usize),
    }
    let mut nodes: Vec<(f64, Node)> = params.iter().map(|&s| (s, Node::Smooth(s))).collect();
    nodes.extend(corner_params.iter().enumerate().map(|(i, &s)| (s, Node::Corner(i))));
    nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let corners = table.corners();
    let mut out = Vec::new();
    let m = nodes.len();
    for i in 0..m {
        match nodes[i].1 {
            Node::Smooth(s) => {
                let f = table.frame_unchecked(s);
                out.push(BundlePoint { x: f.point, u: f.tangent });
            }
            Node::Corner(ci) => {
                let c = &corners[ci];
                let turn = c.turning();
                let steps = ((turn.abs() / max_turn).ceil() as usize).max(1);
                out.push(BundlePoint { x: c.point, u: c.incoming });
                for j in 1..steps {
                    out.push(BundlePoint {
                        x: c.point,
                        u: rotate(&c.incoming, turn * j as f64 / steps as f64),
                    });
                }
                out.push(BundlePoint { x: c.point, u: c.outgoing });
            }
        }
        // Refine the smooth stretch up to the next node.
        let a = nodes[i].0;
        let b = if i + 1 < m { nodes[i + 1].0 } else { nodes[0].0 + per };
        let ta = table.frame_unchecked(a).tangent;
        let tb = table.frame_before(b).tangent;
        refine(table, a, b, ta, tb, max_turn, 0, &mut out);
    }
    Ok(BundleSample::from_points(out, table.id()))
}

#[allow(clippy::too_many_arguments)]
fn refine(table: &Table, a: f64, b: f64, ta: Vec2, tb: Vec2, max_turn: f64, depth: u32, out: &mut Vec<BundlePoint>) {
    if depth > 30 || b - a < 1e-14 {
        return;
    }
    let mid = 0.5 * (a + b);
    let fm = table.frame_unchecked(mid);
    let turn = signed_angle(&ta, &fm.tangent).abs() + signed_angle(&fm.tangent, &tb).abs();
    if turn <= max_turn {
        return;
    }
    refine(table, a, mid, ta, fm.tangent, max_turn, depth + 1, out);
    out.push(BundlePoint { x: fm.point, u: fm.tangent });
    refine(table, mid, b, fm.tangent, tb, max_turn, depth + 1, out);
}

#[inline]
fn product_distance(p: &BundlePoint, q: &BundlePoint) -> f64 {
    (p.x - q.x).norm().max((p.u - q.u).norm())
}

/// `max_{p in a} min_{q in b} d(p, q)`, with `b` sorted by base x-coordinate.
fn directed(a: &[BundlePoint], b_sorted: &[BundlePoint]) -> f64 {
    let xs: Vec<f64> = b_sorted.iter().map(|q| q.x.x).collect();
    let worst = AtomicU64::new(0f64.to_bits());
    a.par_iter().for_each(|p| {
        let floor = f64::from_bits(worst.load(Ordering::Relaxed));
        let start = xs.partition_point(|&x| x < p.x.x);
        let mut best = f64::INFINITY;
        let (mut lo, mut hi) = (start, start);
        loop {
            let left_open = lo > 0 && p.x.x - xs[lo - 1] < best;
            let right_open = hi < xs.len() && xs[hi] - p.x.x < best;
            if !left_open && !right_open {
                break;
            }
            if right_open {
                best = best.min(product_distance(p, &b_sorted[hi]));
                hi += 1;
            }
            if left_open {
                lo -= 1;
                best = best.min(product_distance(p, &b_sorted[lo]));
            }
            if best <= floor {
                // Cannot raise the running maximum.
                return;
            }
        }
        // Non-negative floats order like their bit patterns.
        worst.fetch_max(best.to_bits(), Ordering::Relaxed);
    });
    f64::from_bits(worst.into_inner())
}

/// Symmetric Hausdorff distance between two bundle samples.
pub fn alpha_distance(k1: &BundleSample, k2: &BundleSample) -> Result<f64, MetricError> {
    if k1.is_empty() || k2.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let sorted = |k: &BundleSample| {
        let mut v = k.points.clone();
        v.sort_by(|p, q| p.x.x.partial_cmp(&q.x.x).unwrap());
        v
    };
    let (s1, s2) = (sorted(k1), sorted(k2));
    Ok(directed(&k1.points, &s2).max(directed(&k2.points, &s1)))
}

/// Convenience: sample both tables at resolution `n` and compare.
pub fn alpha_between(t1: &Table, t2: &Table, n: usize) -> Result<f64, MetricError> {
    alpha_distance(&sample_unit_tangent_bundle(t1, n)?, &sample_unit_tangent_bundle(t2, n)?)
}
