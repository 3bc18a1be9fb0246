use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_periodic_orbit, PeriodicOrbit};
use crate::geom::{circular_distance, Vec2};
use crate::phase::{iterate, iterate_until_return, PhasePoint, Termination, CORNER_GUARD};
use crate::table::Table;
use crate::variational::BounceConfiguration;

/// Open box in phase coordinates: arc-length parameter times the angle of the
/// direction from the tangent toward the outward normal. Admissible
/// directions have angle in `[0, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub s: [f64; 2],
    pub phi: [f64; 2],
}

impl PhaseCell {
    pub fn new(s: [f64; 2], phi: [f64; 2]) -> Self {
        Self { s, phi }
    }

    /// `ns` by `nphi` grid over `[0, 1) x [0, pi]`.
    pub fn grid(ns: usize, nphi: usize) -> Vec<PhaseCell> {
        let mut cells = Vec::with_capacity(ns * nphi);
        for i in 0..ns {
            for j in 0..nphi {
                cells.push(PhaseCell::new(
                    [i as f64 / ns as f64, (i + 1) as f64 / ns as f64],
                    [PI * j as f64 / nphi as f64, PI * (j + 1) as f64 / nphi as f64],
                ));
            }
        }
        cells
    }

    pub fn is_valid(&self) -> bool {
        self.s[0] < self.s[1] && self.phi[0] < self.phi[1] && self.s[0] >= 0.0 && self.s[1] <= 1.0
    }

    /// Whether the cell meets the set of admissible directions.
    pub fn is_admissible(&self) -> bool {
        self.is_valid() && self.phi[0] < PI && self.phi[1] > 0.0
    }

    pub fn contains(&self, s: f64, phi: f64) -> bool {
        self.s[0] < s && s < self.s[1] && self.phi[0] < phi && phi < self.phi[1]
    }

    fn contains_point(&self, table: &Table, p: &PhasePoint) -> bool {
        self.contains(p.s, p.angle(table))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Covered,
    Uncovered,
    Inadmissible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub cell: PhaseCell,
    pub status: CellStatus,
    /// Index into `CoverageReport::orbits`.
    pub witness: Option<usize>,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub tau_max: usize,
    pub budget: usize,
    pub cells: Vec<CellReport>,
    pub orbits: Vec<PeriodicOrbit>,
    pub admissible: usize,
    pub covered: usize,
    /// Covered fraction of the admissible cells.
    pub coverage: f64,
}

/// Trajectory start points whose orbit return distance is larger than this
/// are not worth polishing.
const NEAR_RETURN: f64 = 0.05;
const RETURN_TOL: f64 = 1e-9;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Unfolding direction `p e_a + q e_b` with its complexity `|p| + |q|`.
#[derive(Clone, Copy, Debug)]
struct Direction {
    v: Vec2,
    complexity: u32,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer combinations of pairs of edge directions, simplest first.
fn unfolding_directions(table: &Table, max_complexity: u32) -> Vec<Direction> {
    let Some(vertices) = table.vertices() else {
        return Vec::new();
    };
    let n = vertices.len();
    let mut edges: Vec<Vec2> = Vec::new();
    for i in 0..n {
        let e = (vertices[(i + 1) % n] - vertices[i]).normalize();
        if !edges.iter().any(|f| f.perp(&e).abs() < 1e-12) {
            edges.push(e);
        }
        if edges.len() == 8 {
            break;
        }
    }
    let mut out: Vec<Direction> = Vec::new();
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            let m = max_complexity as i64;
            for p in -m..=m {
                for q in -m..=m {
                    let c = (p.unsigned_abs() + q.unsigned_abs()) as u32;
                    if c == 0 || c > max_complexity || gcd(p.unsigned_abs() as u32, q.unsigned_abs() as u32) != 1 {
                        continue;
                    }
                    let v = (p as f64 * edges[a] + q as f64 * edges[b]).normalize();
                    out.push(Direction { v, complexity: c });
                }
            }
        }
    }
    out.sort_by(|x, y| x.complexity.cmp(&y.complexity).then(x.v.y.atan2(x.v.x).total_cmp(&y.v.y.atan2(y.v.x))));
    let mut kept: Vec<Direction> = Vec::new();
    for d in out {
        if !kept.iter().any(|k| (k.v - d.v).norm() < 1e-12) {
            kept.push(d);
        }
    }
    kept
}

/// Deterministic point of `(lo, hi)` for attempt `k`.
fn spread(lo: f64, hi: f64, k: usize, shift: f64) -> f64 {
    let x = (0.5 + shift + k as f64 * GOLDEN).fract().clamp(1e-6, 1.0 - 1e-6);
    lo + (hi - lo) * x
}

struct Scanner<'a> {
    table: &'a Table,
    tau_max: usize,
    directions: Vec<Direction>,
}

impl Scanner<'_> {
    fn attempt(&self, cell: &PhaseCell, k: usize, shift: f64) -> Option<PeriodicOrbit> {
        let s = spread(cell.s[0], cell.s[1], k, shift);
        if self.table.corner_distance(s) < CORNER_GUARD {
            return None;
        }
        let frame = self.table.evaluate(s).ok()?;
        let (t, n_out) = (frame.tangent, frame.outward_normal());
        let feasible: Vec<(Vec2, f64)> = self
            .directions
            .iter()
            .filter_map(|d| {
                let phi = d.v.dot(&n_out).atan2(d.v.dot(&t));
                (phi > 0.0 && phi < PI && cell.phi[0] < phi && phi < cell.phi[1]).then_some((d.v, phi))
            })
            .collect();
        let orbit = if feasible.is_empty() {
            let lo = cell.phi[0].max(0.0);
            let hi = cell.phi[1].min(PI);
            let phi = spread(lo, hi, k, 1.0 - shift).clamp(1e-3, PI - 1e-3);
            let start = PhasePoint::from_angle(self.table, s, phi).ok()?;
            self.near_return(&start)?
        } else {
            let (v, _) = feasible[k % feasible.len()];
            self.unfolded(&PhasePoint::new(s, v))?
        };
        let hit = orbit.phase_points.iter().any(|p| cell.contains_point(self.table, p));
        hit.then_some(orbit)
    }

    /// Periodic directions of rational polygons return to the start exactly.
    fn unfolded(&self, start: &PhasePoint) -> Option<PeriodicOrbit> {
        let traj = iterate_until_return(self.table, start, self.tau_max, RETURN_TOL);
        if traj.termination != Termination::Completed {
            return None;
        }
        let tau = traj.bounces();
        let c = BounceConfiguration::new(traj.points[1..].iter().map(|p| p.s).collect());
        find_periodic_orbit(self.table, tau, &c).ok()
    }

    /// Seeds Newton at the closest return of a trajectory.
    fn near_return(&self, start: &PhasePoint) -> Option<PeriodicOrbit> {
        let per = self.table.perimeter();
        let traj = iterate(self.table, start, self.tau_max);
        let (tau, gap) = (2..=traj.bounces())
            .map(|j| {
                let p = &traj.points[j];
                (j, circular_distance(p.s, start.s, per).max((p.v - start.v).norm()))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if gap > NEAR_RETURN {
            return None;
        }
        let c = BounceConfiguration::new(traj.points[..tau].iter().map(|p| p.s).collect());
        find_periodic_orbit(self.table, tau, &c).ok()
    }
}

/// Looks for a periodic orbit with a phase point in each cell.
///
/// The budget is the total number of attempts, split evenly over the
/// admissible cells (the first `budget % n` cells get one more). Each cell
/// runs its own deterministic attempt sequence, so raising the budget never
/// loses a covered cell.
pub fn density_scan(table: &Table, grid: &[PhaseCell], tau_max: usize, budget: usize) -> CoverageReport {
    density_scan_seeded(table, grid, tau_max, budget, 0)
}

/// As [`density_scan`], with `rng_seed` jittering the in-cell sample points.
pub fn density_scan_seeded(
    table: &Table,
    grid: &[PhaseCell],
    tau_max: usize,
    budget: usize,
    rng_seed: u64,
) -> CoverageReport {
    let scanner = Scanner {
        table,
        tau_max,
        directions: unfolding_directions(table, (tau_max / 2).max(1) as u32),
    };
    let admissible: Vec<usize> = (0..grid.len()).filter(|&i| grid[i].is_admissible()).collect();
    let n = admissible.len();
    let mut share = vec![0usize; grid.len()];
    for (rank, &i) in admissible.iter().enumerate() {
        share[i] = budget / n + usize::from(rank < budget % n);
    }
    let results: Vec<(usize, Option<PeriodicOrbit>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(i as u64);
            let shift: f64 = rng.gen();
            for k in 0..share[i] {
                if let Some(orbit) = scanner.attempt(cell, k, shift) {
                    return (k + 1, Some(orbit));
                }
            }
            (share[i], None)
        })
        .collect();
    let mut cells = Vec::with_capacity(grid.len());
    let mut orbits = Vec::new();
    for (cell, (attempts, orbit)) in grid.iter().zip(results) {
        let (status, witness) = match orbit {
            _ if !cell.is_admissible() => (CellStatus::Inadmissible, None),
            Some(o) => {
                orbits.push(o);
                (CellStatus::Covered, Some(orbits.len() - 1))
            }
            None => (CellStatus::Uncovered, None),
        };
        cells.push(CellReport {
            cell: *cell,
            status,
            witness,
            attempts,
        });
    }
    let covered = orbits.len();
    CoverageReport {
        tau_max,
        budget,
        cells,
        orbits,
        admissible: n,
        covered,
        coverage: if n == 0 { 0.0 } else { covered as f64 / n as f64 },
    }
}
