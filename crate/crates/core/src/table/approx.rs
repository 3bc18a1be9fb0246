use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_rational::Ratio;

use super::rational::{Anchor, RationalAngleSpec};
use super::{Table, TableError};
use crate::geom::{signed_angle, Vec2};
use crate::metric::alpha_between;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxOptions {
    /// Largest polygon tried before giving up.
    pub max_vertices: usize,
    /// Largest denominator `D` of the snapped turning angles `k pi / D`.
    pub denominator_cap: i64,
    /// Bundle sample resolution used to measure the distance to the table.
    pub alpha_samples: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            max_vertices: 4096,
            denominator_cap: 360,
            alpha_samples: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RationalApproximation {
    pub table: Table,
    pub vertices: usize,
    /// Common denominator of the interior angles (as fractions of pi).
    pub denominator: i64,
    pub alpha: f64,
    /// Largest gap between a polygon turning angle and the table's turning
    /// at the same vertex (zero on smooth stretches).
    pub max_turn_discrepancy: f64,
}

/// Turning numerators for denominator `d`. The cumulative turning is rounded
/// rather than each angle, so every side direction stays within `pi / 2d` of
/// the sampled one and the numerators sum to `2d`.
fn snap(turns: &[f64], d: i64) -> Option<(Vec<i64>, f64)> {
    let scale = d as f64 / PI;
    let mut k = Vec::with_capacity(turns.len());
    let mut total = 0.0;
    let mut prev = 0i64;
    for t in turns {
        total += t;
        let cum = (total * scale).round() as i64;
        k.push(cum - prev);
        prev = cum;
    }
    if prev != 2 * d || k.iter().any(|&ki| ki.abs() >= d) {
        return None;
    }
    let err = turns
        .iter()
        .zip(&k)
        .map(|(t, &ki)| (t - ki as f64 * PI / d as f64).abs())
        .fold(0.0, f64::max);
    Some((k, err))
}

struct Candidate {
    spec: RationalAngleSpec,
    denominator: i64,
    /// Turning of the source table at each kept vertex.
    source_turn: Vec<f64>,
    snapped_turn: Vec<f64>,
}

impl Table {
    /// `n` parameters equispaced in the measure `ds / P + |dtheta| / Theta`,
    /// so tight bends get as many nodes as long flat stretches.
    fn balanced_nodes(&self, n: usize) -> Vec<f64> {
        let per = self.perimeter();
        let fine = (16 * n).max(4096);
        let tangents: Vec<Vec2> = (0..=fine)
            .map(|i| self.frame_unchecked(per * i as f64 / fine as f64).tangent)
            .collect();
        // Corners are nodes of their own; only smooth bending is spread out.
        let h = per / fine as f64;
        let bends: Vec<f64> = (0..fine)
            .map(|i| {
                if self.corner_distance(h * (i as f64 + 0.5)) <= h {
                    0.0
                } else {
                    signed_angle(&tangents[i], &tangents[i + 1]).abs()
                }
            })
            .collect();
        let total_bend: f64 = bends.iter().sum();
        if total_bend <= 0.0 {
            return (0..n).map(|k| per * k as f64 / n as f64).collect();
        }
        let mut mu = Vec::with_capacity(fine + 1);
        mu.push(0.0);
        for b in &bends {
            let last = *mu.last().unwrap();
            mu.push(last + 1.0 / fine as f64 + b / total_bend);
        }
        let scale = mu[fine] / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        for k in 0..n {
            let target = scale * k as f64;
            while mu[i + 1] < target {
                i += 1;
            }
            let frac = (target - mu[i]) / (mu[i + 1] - mu[i]);
            out.push(per * (i as f64 + frac) / fine as f64);
        }
        out
    }

    fn rational_candidate(&self, n: usize, q: i64) -> Option<Candidate> {
        let per = self.perimeter();
        let mut nodes: Vec<(f64, f64)> = self.corners.iter().map(|c| (c.param, c.turning())).collect();
        for s in self.balanced_nodes(n) {
            if self.corner_distance(s) > 1e-9 * per {
                nodes.push((s, 0.0));
            }
        }
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pts: Vec<(Vec2, f64)> = nodes.iter().map(|&(s, t)| (self.point(s), t)).collect();

        // Drop collinear vertices (straight edges of the source).
        loop {
            let m = pts.len();
            let keep: Vec<bool> = (0..m)
                .map(|i| {
                    let e0 = pts[i].0 - pts[(i + m - 1) % m].0;
                    let e1 = pts[(i + 1) % m].0 - pts[i].0;
                    signed_angle(&e0, &e1).abs() > 1e-12
                })
                .collect();
            if keep.iter().all(|&k| k) {
                break;
            }
            pts = pts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
            if pts.len() < 3 {
                return None;
            }
        }
        let m = pts.len();
        let edges: Vec<Vec2> = (0..m).map(|i| pts[(i + 1) % m].0 - pts[i].0).collect();
        let turns: Vec<f64> = (0..m).map(|i| signed_angle(&edges[(i + m - 1) % m], &edges[i])).collect();

        let mut best: Option<(i64, Vec<i64>, f64)> = None;
        for d in 1..=q {
            if let Some((k, err)) = snap(&turns, d) {
                if best.as_ref().is_none_or(|b| err < b.2) {
                    best = Some((d, k, err));
                }
            }
        }
        let (d, k, _) = best?;

        // Merge sides across vertices whose turning snapped to zero.
        let verts: Vec<usize> = (0..m).filter(|&i| k[i] != 0).collect();
        if verts.len() < 3 {
            return None;
        }
        // Start at the first kept vertex so side 0 begins there.
        let first = verts[0];
        let mv = verts.len();
        let mut lengths = Vec::with_capacity(mv);
        for j in 0..mv {
            let a = verts[j];
            let b = verts[(j + 1) % mv];
            let mut len = 0.0;
            let mut i = a;
            loop {
                len += edges[i].norm();
                i = (i + 1) % m;
                if i == b {
                    break;
                }
            }
            lengths.push(len);
        }
        let angles: Vec<Ratio<i64>> = verts.iter().map(|&i| Ratio::new(d - k[i], d)).collect();
        let theta0 = edges[first].y.atan2(edges[first].x);
        // Side directions exactly as the rational walk computes them.
        let mut turn = Ratio::from_integer(0i64);
        let dirs: Vec<f64> = (0..mv)
            .map(|j| {
                if j > 0 {
                    turn += Ratio::from_integer(1) - angles[j];
                }
                theta0 + PI * (*turn.numer() as f64 / *turn.denom() as f64)
            })
            .collect();
        // Least-squares closure repair: smallest change of the side lengths
        // that makes the walk close.
        let mut aat = Matrix2::zeros();
        let mut al = Vector2::zeros();
        for (l, phi) in lengths.iter().zip(&dirs) {
            let c = Vector2::new(phi.cos(), phi.sin());
            aat += c * c.transpose();
            al += c * *l;
        }
        let lambda = aat.try_inverse()? * al;
        let repaired: Vec<f64> = lengths
            .iter()
            .zip(&dirs)
            .map(|(l, phi)| l - (lambda.x * phi.cos() + lambda.y * phi.sin()))
            .collect();
        if repaired.iter().any(|l| *l <= 0.0) {
            return None;
        }
        let start = pts[first].0;
        let spec = RationalAngleSpec {
            angles,
            side_lengths: repaired,
            anchor: Some(Anchor {
                start: [start.x, start.y],
                direction: theta0,
            }),
        };
        Some(Candidate {
            source_turn: verts.iter().map(|&i| pts[i].1).collect(),
            snapped_turn: verts.iter().map(|&i| k[i] as f64 * PI / d as f64).collect(),
            spec,
            denominator: d,
        })
    }

    /// Rational polygon within `tol` of this table in the bundle metric.
    ///
    /// Samples the boundary at its corners plus `n` equispaced points, snaps
    /// the turning angles to multiples of `pi / D` (`D` up to the cap), fixes
    /// closure by a least-squares change of the side lengths, and refines `n`
    /// until the distance and every per-vertex turning gap (at most `tol / 5`)
    /// are small enough.
    pub fn approximate_by_rational_polygon(
        &self,
        tol: f64,
        opts: &ApproxOptions,
    ) -> Result<RationalApproximation, TableError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(TableError::InvalidParameter(format!("tolerance {tol}")));
        }
        if let Some(spec) = &self.rational {
            return Ok(RationalApproximation {
                table: self.clone(),
                vertices: spec.angles.len(),
                denominator: spec.angles.iter().map(|a| *a.denom()).fold(1, num_integer_lcm),
                alpha: 0.0,
                max_turn_discrepancy: 0.0,
            });
        }
        let turn_tol = tol / 5.0;
        let turning = self.smooth_turning(256);
        let start = (turning / turn_tol).ceil();
        if !start.is_finite() || start > opts.max_vertices as f64 {
            return Err(TableError::TolTooSmall {
                tol,
                cap: opts.max_vertices,
            });
        }
        let mut n = (start as usize).max(8);
        n += n % 2;
        while n + self.corners.len() <= opts.max_vertices {
            if let Some(c) = self.rational_candidate(n, opts.denominator_cap) {
                let disc = c
                    .source_turn
                    .iter()
                    .zip(&c.snapped_turn)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if disc <= turn_tol {
                    if let Ok(table) = Table::build_rational_polygon(&c.spec) {
                        let alpha = alpha_between(self, &table, opts.alpha_samples)
                            .expect("sample resolution is valid");
                        if alpha <= tol {
                            return Ok(RationalApproximation {
                                vertices: c.spec.angles.len(),
                                denominator: c.denominator,
                                table,
                                alpha,
                                max_turn_discrepancy: disc,
                            });
                        }
                    }
                }
            }
            let next = (n as f64 * 1.25).ceil() as usize;
            n = next + next % 2;
        }
        Err(TableError::TolTooSmall {
            tol,
            cap: opts.max_vertices,
        })
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}
