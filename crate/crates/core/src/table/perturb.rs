use std::sync::Arc;

use super::curvature_bump::CurvatureBump;
use super::piece::{CurvePiece, Displacement, Generator, Piece};
use super::{Table, TableError};
use crate::geom::wrap;

/// Result of a local boundary perturbation.
///
/// The perturbed boundary is rescaled to perimeter 1 by the homothety
/// `x -> ratio * x`; `map_param` carries parameters of the original table to
/// the perturbed one.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub table: Table,
    pub ratio: f64,
    pub bump: CurvatureBump,
    lo: f64,
    /// Raw (pre-rescaling) length of the displaced stretch as a function of
    /// base arc length; `None` for the identity perturbation.
    displaced: Option<CurvePiece>,
    lo_position: f64,
    raw_total: f64,
    old_perimeter: f64,
}

impl Perturbation {
    /// Parameter on the perturbed table of the point that sat at `s` on the
    /// original one (bounce points outside the support keep their position
    /// up to the homothety).
    pub fn map_param(&self, s: f64) -> f64 {
        let Some(disp) = &self.displaced else {
            return s;
        };
        let width = 2.0 * self.bump.half_width;
        let d = wrap(s - self.lo, self.old_perimeter);
        let offset = if d <= width {
            disp.s_of_u(d)
        } else {
            disp.length() + (d - width)
        };
        wrap(self.lo_position + offset, self.raw_total) * self.ratio
    }

    /// Curvature of the perturbed table in the scale of the original one.
    pub fn raw_curvature(&self, s_new: f64) -> Result<f64, TableError> {
        Ok(self.table.evaluate(s_new)?.curvature * self.ratio)
    }
}

impl Table {
    /// Pieces covering the parameter range `[a, b]` (`a < b`, may wrap once).
    fn slice(&self, a: f64, b: f64) -> Vec<Piece> {
        let per = self.perimeter();
        let n = self.pieces.len();
        let start = wrap(a, per);
        let (k0, local0) = self.locate(start);
        let mut out = Vec::new();
        let mut remaining = b - a;
        let mut k = k0;
        let mut local = local0;
        while remaining > 1e-15 * per {
            let piece = &self.pieces[k];
            let len = piece.length();
            let take = (len - local).min(remaining);
            if take > 1e-15 * per {
                let end = if local + take >= len - 1e-15 * per { len } else { local + take };
                out.push(piece.sub(local, end));
            }
            remaining -= len - local;
            k = (k + 1) % n;
            local = 0.0;
        }
        out
    }

    /// Pushes the boundary along its inward normal by the bump profile around
    /// `bump.center`, then rescales to perimeter 1. The parameter origin is
    /// kept: parameters outside the support only move by the homothety and by
    /// the change in length of the displaced stretch.
    pub fn perturb_curvature(&self, bump: &CurvatureBump) -> Result<Perturbation, TableError> {
        let per = self.perimeter();
        let rho = bump.half_width;
        if !(rho > 0.0 && 2.0 * rho < per && bump.amplitude.is_finite() && bump.center.is_finite()) {
            return Err(TableError::InvalidParameter(format!(
                "bump half-width {rho} on a table of perimeter {per}"
            )));
        }
        if bump.amplitude == 0.0 {
            return Ok(Perturbation {
                table: self.clone(),
                ratio: 1.0,
                bump: *bump,
                lo: 0.0,
                displaced: None,
                lo_position: 0.0,
                raw_total: per,
                old_perimeter: per,
            });
        }
        let c = wrap(bump.center, per);
        let lo = c - rho;
        let hi = c + rho;
        let hits_corner = || TableError::SupportHitsCorner {
            lo: wrap(lo, per),
            hi: wrap(hi, per),
        };
        if self.corner_distance(c) <= rho {
            return Err(hits_corner());
        }
        let base = self.slice(lo, hi);
        if base.iter().any(Piece::is_displaced) {
            return Err(hits_corner());
        }
        let disp = Arc::new(Displacement::new(base, *bump));
        let width = disp.offsets.last().copied().unwrap();
        // The displaced curve must keep its orientation and stay clear of the
        // rest of the boundary.
        let samples = 512;
        let mut poly = Vec::with_capacity(samples + 64);
        for i in 0..samples {
            let u = width * i as f64 / samples as f64;
            let k = disp.offsets.partition_point(|o| *o <= u).saturating_sub(1).min(disp.base.len() - 1);
            let kappa = disp.base[k].frame(u - disp.offsets[k]).curvature;
            let h = bump.displacement(u - rho)[0];
            if 1.0 - h * kappa <= 0.0 {
                return Err(TableError::SelfIntersecting);
            }
            poly.push(disp.point(u));
        }
        for piece in self.slice(hi, lo + per) {
            poly.extend(piece.polyline());
        }
        if !super::polyline_is_simple(&poly) {
            return Err(TableError::SelfIntersecting);
        }
        let full = CurvePiece::new(Generator::Displaced(disp.clone()), 0.0, width);
        let part = |u0: f64, u1: f64| Piece::Curve(CurvePiece::new(Generator::Displaced(disp.clone()), u0, u1));

        let mut pieces = Vec::new();
        let lo_position;
        if lo < 0.0 || hi > per {
            // The support straddles the parameter origin.
            let u_zero = wrap(-lo, per);
            pieces.push(part(u_zero, width));
            pieces.extend(self.slice(wrap(hi, per), wrap(hi, per) + (per - 2.0 * rho)));
            pieces.push(part(0.0, u_zero));
            let total: f64 = pieces.iter().map(Piece::length).sum();
            lo_position = total - full.s_of_u(u_zero);
        } else {
            if lo > 0.0 {
                pieces.extend(self.slice(0.0, lo));
            }
            pieces.push(Piece::Curve(full.clone()));
            if hi < per {
                pieces.extend(self.slice(hi, per));
            }
            lo_position = lo;
        }
        let raw_total: f64 = pieces.iter().map(Piece::length).sum();
        let table = Table::normalized(pieces)?;
        Ok(Perturbation {
            ratio: 1.0 / raw_total,
            table,
            bump: *bump,
            lo: wrap(lo, per),
            displaced: Some(full),
            lo_position,
            raw_total,
            old_perimeter: per,
        })
    }
}
