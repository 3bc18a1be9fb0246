//! Periodic orbits as critical points of the length functional: a damped
//! Newton solver, multistart search, phase-space coverage scans and
//! persistence under boundary bumps.

mod density;
mod persist;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::{circular_distance, wrap};
use crate::phase::{billiard_map, PhaseError, PhasePoint};
use crate::table::{Table, TableError};
use crate::variational::{
    gradient_residual, hessian_entries, hessian_matrix, length_functional, length_gradient, BounceConfiguration,
    HessianData, VariationalError,
};

pub use density::{density_scan, density_scan_seeded, CellReport, CellStatus, CoverageReport, PhaseCell};
pub use persist::{persistence_test, PersistenceReport};

/// Gradient sup-norm accepted as a critical point.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Allowed mismatch between consecutive phase points and the map.
pub const CLOSURE_TOL: f64 = 1e-7;
/// Parameter distance under which two orbits are the same.
pub const DEDUP_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100;
const MAX_NEWTON_STEP: f64 = 0.1;
const DESCENT_STEPS: usize = 50;
/// Seeds with a shorter chord are discarded before solving.
const MIN_SEED_CHORD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("bounce {index} at s = {s} lies within the corner guard")]
    CornerAdjacent { index: usize, s: f64 },
    #[error("consecutive bounces merged")]
    DegenerateChord,
    #[error("configuration repeats with period {period}")]
    NotPrimitive { period: usize },
    #[error("orbit does not close under the billiard map (gap {gap:e})")]
    NotClosed { gap: f64 },
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl From<VariationalError> for SearchError {
    fn from(e: VariationalError) -> Self {
        match e {
            VariationalError::CornerAdjacent { index, s } => SearchError::CornerAdjacent { index, s },
            VariationalError::InvalidConfiguration(msg) => SearchError::InvalidSeed(msg),
            VariationalError::NotCritical { residual } => SearchError::NoConvergence { iterations: 0, residual },
            VariationalError::Table(t) => SearchError::Table(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub config: BounceConfiguration,
    pub length: f64,
    pub residual: f64,
    /// Present on tables without corners.
    pub hessian: Option<HessianData>,
    /// Bounce parameter with the direction of the chord arriving there.
    pub phase_points: Vec<PhasePoint>,
}

impl PeriodicOrbit {
    pub fn tau(&self) -> usize {
        self.config.tau()
    }

    /// Largest gap between the map image of a phase point and the next one.
    pub fn closure_gap(&self, table: &Table) -> f64 {
        closure_gap(table, &self.phase_points)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient at `params`, with merged chords reported as such.
fn gradient(table: &Table, params: &[f64]) -> Result<Vec<f64>, SearchError> {
    length_gradient(table, &BounceConfiguration::new(params.to_vec())).map_err(|e| match e {
        VariationalError::InvalidConfiguration(_) => SearchError::DegenerateChord,
        other => other.into(),
    })
}

fn shifted(params: &[f64], step: &[f64], t: f64, per: f64) -> Vec<f64> {
    params.iter().zip(step).map(|(s, d)| wrap(s + t * d, per)).collect()
}

fn half_square(g: &[f64]) -> f64 {
    0.5 * g.iter().map(|x| x * x).sum::<f64>()
}

fn hessian(table: &Table, params: &[f64]) -> Result<DMatrix<f64>, SearchError> {
    let (a, b) = hessian_entries(table, &BounceConfiguration::new(params.to_vec()))?;
    Ok(hessian_matrix(&a, &b))
}

/// Gradient descent on half the squared gradient norm; its gradient is `H g`.
fn descend(table: &Table, mut params: Vec<f64>, mut g: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>), SearchError> {
    let per = table.perimeter();
    let mut t: f64 = 1.0;
    for _ in 0..DESCENT_STEPS {
        let h = hessian(table, &params)?;
        let d: Vec<f64> = (-(h * DVector::from_column_slice(&g))).iter().copied().collect();
        let norm = sup(&d);
        if norm == 0.0 {
            break;
        }
        t = t.min(MAX_NEWTON_STEP / norm);
        let phi = half_square(&g);
        let slope: f64 = d.iter().map(|x| x * x).sum();
        let mut accepted = false;
        while t * norm > 1e-14 {
            let trial = shifted(&params, &d, t, per);
            if let Ok(gt) = gradient(table, &trial) {
                if half_square(&gt) <= phi - 1e-4 * t * slope {
                    params = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        t *= 2.0;
    }
    Ok((params, g))
}

/// Damped Newton on the gradient of the length functional.
pub fn find_periodic_orbit(table: &Table, tau: usize, seed: &BounceConfiguration) -> Result<PeriodicOrbit, SearchError> {
    if tau < 2 || seed.tau() != tau {
        return Err(SearchError::InvalidSeed(format!("seed of length {} for period {tau}", seed.tau())));
    }
    let per = table.perimeter();
    let mut params: Vec<f64> = seed.params.iter().map(|&s| wrap(s, per)).collect();
    let mut g = gradient(table, &params)?;
    let mut iterations = 0;
    while sup(&g) > RESIDUAL_TOL {
        if iterations == MAX_ITERATIONS {
            return Err(SearchError::NoConvergence {
                iterations,
                residual: sup(&g),
            });
        }
        iterations += 1;
        let h = hessian(table, &params)?;
        let scale = h.amax();
        let svd = h.svd(true, true);
        let step: Vec<f64> = match svd.pseudo_inverse(1e-12 * scale.max(f64::MIN_POSITIVE)) {
            Ok(pinv) => (-(pinv * DVector::from_column_slice(&g))).iter().copied().collect(),
            Err(_) => vec![0.0; tau],
        };
        if sup(&step) > MAX_NEWTON_STEP || sup(&step) == 0.0 {
            (params, g) = descend(table, params, g)?;
            continue;
        }
        let phi = half_square(&g);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-6 {
            let trial = shifted(&params, &step, t, per);
            if let Ok(gt) = gradient(table, &trial) {
                if half_square(&gt) < (1.0 - 1e-4 * t) * phi {
                    params = trial;
                    g = gt;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            (params, g) = descend(table, params, g)?;
        }
    }
    certify(table, BounceConfiguration::new(params))
}

/// Smallest proper period of the parameter sequence, if any.
fn repeat_period(params: &[f64], per: f64) -> Option<usize> {
    let tau = params.len();
    (1..tau)
        .filter(|d| tau % d == 0)
        .find(|&d| (0..tau).all(|i| circular_distance(params[i], params[(i + d) % tau], per) < DEDUP_TOL))
}

pub(crate) fn phase_points(table: &Table, c: &BounceConfiguration) -> Vec<PhasePoint> {
    let tau = c.tau();
    let x: Vec<_> = c.params.iter().map(|&s| table.point(s)).collect();
    (0..tau)
        .map(|i| {
            let d = x[i] - x[(i + tau - 1) % tau];
            PhasePoint::new(c.params[i], d / d.norm())
        })
        .collect()
}

fn closure_gap(table: &Table, pts: &[PhasePoint]) -> f64 {
    let per = table.perimeter();
    let tau = pts.len();
    (0..tau).fold(0.0, |gap, i| {
        let next = &pts[(i + 1) % tau];
        match billiard_map(table, &pts[i]) {
            Ok(q) => gap.max(circular_distance(q.s, next.s, per).max((q.v - next.v).norm())),
            Err(_) => f64::INFINITY,
        }
    })
}

/// Checks both certificates on a configuration and packages it as an orbit.
pub(crate) fn certify(table: &Table, c: BounceConfiguration) -> Result<PeriodicOrbit, SearchError> {
    let residual = gradient_residual(table, &c)?;
    if residual > RESIDUAL_TOL {
        return Err(SearchError::NoConvergence { iterations: 0, residual });
    }
    if let Some(period) = repeat_period(&c.params, table.perimeter()) {
        return Err(SearchError::NotPrimitive { period });
    }
    let phase_points = phase_points(table, &c);
    let gap = closure_gap(table, &phase_points);
    if gap > CLOSURE_TOL {
        return Err(SearchError::NotClosed { gap });
    }
    let hessian = if table.corners().is_empty() {
        let (a, b) = hessian_entries(table, &c)?;
        Some(HessianData::from_entries(a, b))
    } else {
        None
    };
    Ok(PeriodicOrbit {
        length: length_functional(table, &c)?,
        residual,
        hessian,
        phase_points,
        config: c,
    })
}

/// Whether two configurations agree up to cyclic shift and reversal.
pub fn same_orbit(a: &BounceConfiguration, b: &BounceConfiguration, per: f64) -> bool {
    let tau = a.tau();
    if tau != b.tau() {
        return false;
    }
    let close = |other: &[f64]| {
        (0..tau).any(|k| (0..tau).all(|i| circular_distance(a.params[i], other[(i + k) % tau], per) < DEDUP_TOL))
    };
    close(&b.params) || close(&b.reversed().params)
}

/// Moves an orbit lying in a one-parameter family of critical points (for
/// instance parallel chords between flat sides) to the middle of the family.
/// Families without endpoints, such as rotations on the circle, are left alone.
fn center_in_family(table: &Table, orbit: PeriodicOrbit) -> PeriodicOrbit {
    let per = table.perimeter();
    let Ok(h) = hessian(table, &orbit.config.params) else {
        return orbit;
    };
    let eig = h.symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let null: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-8 * scale)
        .collect();
    if null.len() != 1 {
        return orbit;
    }
    let dir: Vec<f64> = eig.eigenvectors.column(null[0]).iter().copied().collect();
    let base = orbit.config.params.clone();
    let at = |t: f64| certify(table, BounceConfiguration::new(shifted(&base, &dir, t, per)));
    let reach = |sign: f64| -> Option<f64> {
        let (mut ok, mut bad) = (0.0, 1e-4 * per);
        while at(sign * bad).is_ok() {
            ok = bad;
            bad *= 2.0;
            if bad > per {
                return None;
            }
        }
        while bad - ok > 1e-12 * per {
            let mid = 0.5 * (ok + bad);
            if at(sign * mid).is_ok() {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        Some(sign * ok)
    };
    match (reach(1.0), reach(-1.0)) {
        (Some(hi), Some(lo)) => at(0.5 * (hi + lo)).unwrap_or(orbit),
        _ => orbit,
    }
}

/// Latin hypercube sample of `n` points in the unit `dim`-cube.
fn latin_hypercube(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    for j in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            strata.swap(i, rng.gen_range(0..=i));
        }
        for (p, k) in points.iter_mut().zip(strata) {
            p[j] = (k as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    points
}

fn seed_is_usable(table: &Table, params: &[f64]) -> bool {
    let tau = params.len();
    let x: Vec<_> = params.iter().map(|&s| table.point(s)).collect();
    (0..tau).all(|i| {
        (x[(i + 1) % tau] - x[i]).norm() >= MIN_SEED_CHORD && table.corner_distance(params[i]) >= MIN_SEED_CHORD
    })
}

/// `n_seeds` stratified seeds for every period `2..=tau_max`, solved in
/// parallel, deduplicated and sorted by period then length. Orbits in a
/// bounded family of critical points are reported by the family's center.
pub fn multistart_search(table: &Table, tau_max: usize, n_seeds: usize, rng_seed: u64) -> Vec<PeriodicOrbit> {
    let per = table.perimeter();
    let mut seeds = Vec::new();
    for tau in 2..=tau_max {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(tau as u64);
        for p in latin_hypercube(&mut rng, n_seeds, tau) {
            let params: Vec<f64> = p.iter().map(|u| u * per).collect();
            if seed_is_usable(table, &params) {
                seeds.push(BounceConfiguration::new(params));
            }
        }
    }
    let mut found: Vec<PeriodicOrbit> = seeds
        .par_iter()
        .filter_map(|seed| find_periodic_orbit(table, seed.tau(), seed).ok())
        .map(|orbit| center_in_family(table, orbit))
        .collect();
    found.sort_by(|a, b| {
        a.tau()
            .cmp(&b.tau())
            .then(a.length.total_cmp(&b.length))
            .then_with(|| {
                a.config
                    .params
                    .iter()
                    .zip(&b.config.params)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut kept: Vec<PeriodicOrbit> = Vec::new();
    for orbit in found {
        if !kept.iter().any(|k| same_orbit(&k.config, &orbit.config, per)) {
            kept.push(orbit);
        }
    }
    kept
}

#[cfg(test)]
mod tests;
