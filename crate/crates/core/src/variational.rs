//! Length functional on closed bounce configurations, its gradient, and the
//! Hessian with its nondegeneracy certificate.
//!
//! All derivatives are taken with respect to the arc-length parameters of the
//! bounce points. For a chord from bounce `j` to bounce `k` with length `L`,
//! unit direction `u`, unit tangents `t` and inward normals `n`:
//!
//! ```text
//! d2L/ds_k2     = (1 - (u.t_k)^2) / L + kappa_k (u.n_k)
//! d2L/ds_j2     = (1 - (u.t_j)^2) / L - kappa_j (u.n_j)
//! d2L/ds_j ds_k = -(t_j.t_k - (u.t_j)(u.t_k)) / L
//! ```
//!
//! The diagonal entry `a_i` sums the two chords meeting at bounce `i`; `b_i`
//! is the mixed entry of the chord from bounce `i` to bounce `i + 1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::circular_distance;
use crate::phase::{CORNER_GUARD, T_MIN};
use crate::table::{CurvatureBump, Frame, Table, TableError};

/// Threshold on the determinant of the row-balanced Hessian.
pub const TOL_DET: f64 = 1e-8;
/// Gradient sup-norm allowed before a Hessian is assembled.
pub const CRITICAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("bounce {index} at s = {s} lies within the corner guard")]
    CornerAdjacent { index: usize, s: f64 },
    #[error("configuration is not critical (gradient residual {residual:e})")]
    NotCritical { residual: f64 },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Closed sequence of bounce parameters; index `tau` wraps to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BounceConfiguration {
    pub params: Vec<f64>,
}

impl BounceConfiguration {
    pub fn new(params: Vec<f64>) -> Self {
        Self { params }
    }

    pub fn tau(&self) -> usize {
        self.params.len()
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut p = self.params.clone();
        p.rotate_left(k % self.tau().max(1));
        Self::new(p)
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.params.clone();
        p.reverse();
        Self::new(p)
    }
}

/// Frames at the bounce points after validating the configuration.
fn frames(table: &Table, c: &BounceConfiguration) -> Result<Vec<Frame>, VariationalError> {
    let tau = c.tau();
    if tau < 2 {
        return Err(VariationalError::InvalidConfiguration(format!("period {tau} < 2")));
    }
    let mut out = Vec::with_capacity(tau);
    for (index, &s) in c.params.iter().enumerate() {
        if !s.is_finite() {
            return Err(VariationalError::InvalidConfiguration(format!("parameter {s}")));
        }
        if table.corner_distance(s) < CORNER_GUARD {
            return Err(VariationalError::CornerAdjacent { index, s });
        }
        out.push(table.evaluate(s)?);
    }
    for i in 0..tau {
        let d = (out[(i + 1) % tau].point - out[i].point).norm();
        if d < T_MIN {
            return Err(VariationalError::InvalidConfiguration(format!(
                "bounces {i} and {} coincide",
                (i + 1) % tau
            )));
        }
    }
    Ok(out)
}

pub fn length_functional(table: &Table, c: &BounceConfiguration) -> Result<f64, VariationalError> {
    let f = frames(table, c)?;
    let tau = f.len();
    Ok((0..tau).map(|i| (f[(i + 1) % tau].point - f[i].point).norm()).sum())
}

fn unit_chords(f: &[Frame]) -> Vec<(nalgebra::Vector2<f64>, f64)> {
    let tau = f.len();
    (0..tau)
        .map(|i| {
            let d = f[(i + 1) % tau].point - f[i].point;
            let l = d.norm();
            (d / l, l)
        })
        .collect()
}

pub fn length_gradient(table: &Table, c: &BounceConfiguration) -> Result<Vec<f64>, VariationalError> {
    let f = frames(table, c)?;
    let chords = unit_chords(&f);
    let tau = f.len();
    Ok((0..tau)
        .map(|i| {
            let incoming = chords[(i + tau - 1) % tau].0;
            let outgoing = chords[i].0;
            f[i].tangent.dot(&(incoming - outgoing))
        })
        .collect())
}

/// Sup-norm of the gradient.
pub fn gradient_residual(table: &Table, c: &BounceConfiguration) -> Result<f64, VariationalError> {
    Ok(length_gradient(table, c)?.iter().fold(0.0, |m, g| m.max(g.abs())))
}

/// Diagonal entries `a` and chord mixed entries `b` (no criticality check).
pub fn hessian_entries(table: &Table, c: &BounceConfiguration) -> Result<(Vec<f64>, Vec<f64>), VariationalError> {
    let f = frames(table, c)?;
    let chords = unit_chords(&f);
    let tau = f.len();
    let mut a = vec![0.0; tau];
    let mut b = vec![0.0; tau];
    for j in 0..tau {
        let k = (j + 1) % tau;
        let (u, l) = chords[j];
        let (fj, fk) = (&f[j], &f[k]);
        let (utj, utk) = (u.dot(&fj.tangent), u.dot(&fk.tangent));
        a[j] += (1.0 - utj * utj) / l - fj.curvature * u.dot(&fj.inward_normal());
        a[k] += (1.0 - utk * utk) / l + fk.curvature * u.dot(&fk.inward_normal());
        b[j] = -(fj.tangent.dot(&fk.tangent) - utj * utk) / l;
    }
    Ok((a, b))
}

/// Hessian matrix from its entries: cyclic tridiagonal for `tau > 2`, and
/// `[[a_1, b_1 + b_2], [b_1 + b_2, a_2]]` for `tau = 2`.
pub fn hessian_matrix(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let tau = a.len();
    let mut m = DMatrix::zeros(tau, tau);
    for i in 0..tau {
        m[(i, i)] = a[i];
    }
    if tau == 2 {
        m[(0, 1)] = b[0] + b[1];
        m[(1, 0)] = b[0] + b[1];
    } else {
        for i in 0..tau {
            let k = (i + 1) % tau;
            m[(i, k)] = b[i];
            m[(k, i)] = b[i];
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub det: f64,
    /// Determinant after scaling each row to unit max-norm.
    pub balanced_det: f64,
    pub min_abs_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    pub nondegenerate: bool,
    /// Number of negative eigenvalues.
    pub index: usize,
}

pub fn check_nondegeneracy(m: &DMatrix<f64>) -> Verdict {
    let det = m.clone().lu().determinant();
    let mut balanced = m.clone();
    for mut row in balanced.row_iter_mut() {
        let scale = row.amax();
        if scale > 0.0 {
            row /= scale;
        }
    }
    let balanced_det = balanced.lu().determinant();
    let sym = 0.5 * (m + m.transpose());
    let mut eigenvalues: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let scale = eigenvalues.iter().fold(0.0f64, |s, e| s.max(e.abs()));
    let index = eigenvalues.iter().filter(|&&e| e < -1e-12 * scale).count();
    let min_abs_eigenvalue = eigenvalues.iter().fold(f64::INFINITY, |s, e| s.min(e.abs()));
    Verdict {
        det,
        balanced_det,
        min_abs_eigenvalue,
        eigenvalues,
        nondegenerate: balanced_det.abs() > TOL_DET,
        index,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianData {
    pub tau: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub det: f64,
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub nondegenerate: bool,
}

impl HessianData {
    pub fn from_entries(a: Vec<f64>, b: Vec<f64>) -> Self {
        let matrix = hessian_matrix(&a, &b);
        let v = check_nondegeneracy(&matrix);
        Self {
            tau: a.len(),
            a,
            b,
            matrix,
            det: v.det,
            eigenvalues: v.eigenvalues,
            index: v.index,
            nondegenerate: v.nondegenerate,
        }
    }

    pub fn verdict(&self) -> Verdict {
        check_nondegeneracy(&self.matrix)
    }

    /// Rows of the matrix, for reports.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Hessian at a critical configuration.
pub fn assemble_hessian(table: &Table, c: &BounceConfiguration) -> Result<HessianData, VariationalError> {
    let residual = gradient_residual(table, c)?;
    if residual > CRITICAL_TOL {
        return Err(VariationalError::NotCritical { residual });
    }
    let (a, b) = hessian_entries(table, c)?;
    Ok(HessianData::from_entries(a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivitySample {
    pub delta: f64,
    /// Diagonal entry at the perturbed bounce, in the original table's scale.
    pub a_i: f64,
    /// All mixed entries, in the original table's scale.
    pub b: Vec<f64>,
}

/// Half-width of a curvature bump at bounce `i` that stays clear of the other
/// bounces and of corners.
pub fn bump_half_width(table: &Table, c: &BounceConfiguration, i: usize) -> f64 {
    let per = table.perimeter();
    let s = c.params[i];
    let mut room = table.corner_distance(s);
    for (j, &o) in c.params.iter().enumerate() {
        if j != i {
            room = room.min(circular_distance(s, o, per));
        }
    }
    (0.25 * room).min(0.05 * per)
}

/// Diagonal entry `a_i` after changing the curvature at bounce `i` by each
/// offset (point and tangent held fixed), with the mixed entries alongside.
pub fn curvature_sensitivity(
    table: &Table,
    c: &BounceConfiguration,
    i: usize,
    deltas: &[f64],
) -> Result<Vec<SensitivitySample>, VariationalError> {
    if i >= c.tau() {
        return Err(VariationalError::InvalidConfiguration(format!("bounce index {i}")));
    }
    let residual = gradient_residual(table, c)?;
    if residual > CRITICAL_TOL {
        return Err(VariationalError::NotCritical { residual });
    }
    let rho = bump_half_width(table, c, i);
    deltas
        .iter()
        .map(|&delta| {
            let p = table.perturb_curvature(&CurvatureBump::curvature_offset(c.params[i], rho, delta))?;
            let moved = BounceConfiguration::new(c.params.iter().map(|&s| p.map_param(s)).collect());
            let (a, b) = hessian_entries(&p.table, &moved)?;
            Ok(SensitivitySample {
                delta,
                a_i: a[i] * p.ratio,
                b: b.iter().map(|x| x * p.ratio).collect(),
            })
        })
        .collect()
}
