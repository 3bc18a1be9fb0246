use serde::Serialize;

use super::{find_periodic_orbit, PeriodicOrbit, SearchError};
use crate::geom::circular_distance;
use crate::table::{CurvatureBump, Table};
use crate::variational::BounceConfiguration;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistenceReport {
    /// Orbit on the perturbed table.
    pub orbit: PeriodicOrbit,
    /// Old configuration carried to the perturbed table.
    pub seed: BounceConfiguration,
    /// Sup-norm distance between the new orbit and the carried seed.
    pub displacement: f64,
    pub amplitude: f64,
    /// `displacement / |amplitude|`, zero for a zero bump.
    pub ratio: f64,
    /// Homothety factor applied after the bump.
    pub homothety: f64,
    /// Nondegeneracy of the original orbit, when its Hessian is known.
    pub nondegenerate: Option<bool>,
}

/// Bumps the boundary and follows the orbit to the perturbed table.
pub fn persistence_test(
    table: &Table,
    orbit: &PeriodicOrbit,
    bump: &CurvatureBump,
) -> Result<PersistenceReport, SearchError> {
    let p = table.perturb_curvature(bump)?;
    let seed = BounceConfiguration::new(orbit.config.params.iter().map(|&s| p.map_param(s)).collect());
    let found = find_periodic_orbit(&p.table, seed.tau(), &seed)?;
    let per = p.table.perimeter();
    let displacement = found
        .config
        .params
        .iter()
        .zip(&seed.params)
        .fold(0.0f64, |m, (a, b)| m.max(circular_distance(*a, *b, per)));
    let amplitude = bump.amplitude;
    Ok(PersistenceReport {
        orbit: found,
        seed,
        displacement,
        amplitude,
        ratio: if amplitude == 0.0 { 0.0 } else { displacement / amplitude.abs() },
        homothety: p.ratio,
        nondegenerate: orbit.hessian.as_ref().map(|h| h.nondegenerate),
    })
}
