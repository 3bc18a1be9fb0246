use std::f64::consts::{PI, TAU};

use super::*;
use crate::table::CurvatureBump;

fn circle_chord_length(n: usize) -> f64 {
    n as f64 * 2.0 * (1.0 / TAU) * (PI / n as f64).sin()
}

#[test]
fn square_vertical_orbit_from_near_midpoints() {
    let sq = Table::unit_square();
    let seed = BounceConfiguration::new(vec![0.13, 0.62]);
    let o = find_periodic_orbit(&sq, 2, &seed).unwrap();
    assert!((o.length - 0.5).abs() < 1e-12);
    assert!(o.residual <= RESIDUAL_TOL);
    assert!(o.closure_gap(&sq) <= CLOSURE_TOL);
    assert!(o.hessian.is_none());
}

#[test]
fn circle_triangle_from_symmetric_seed() {
    let c = Table::circle();
    let seed = BounceConfiguration::new(vec![0.01, 0.35, 0.69]);
    let o = find_periodic_orbit(&c, 3, &seed).unwrap();
    assert!((o.length - 3.0 * 3f64.sqrt() / TAU).abs() < 1e-12);
    let h = o.hessian.as_ref().unwrap();
    assert!(!h.nondegenerate);
}

#[test]
fn seed_at_a_corner() {
    let sq = Table::unit_square();
    let err = find_periodic_orbit(&sq, 2, &BounceConfiguration::new(vec![0.25, 0.6])).unwrap_err();
    assert!(matches!(err, SearchError::CornerAdjacent { index: 0, .. }), "{err:?}");
}

#[test]
fn seed_shape_is_checked() {
    let c = Table::circle();
    assert!(matches!(
        find_periodic_orbit(&c, 3, &BounceConfiguration::new(vec![0.1, 0.5])),
        Err(SearchError::InvalidSeed(_))
    ));
    assert!(matches!(
        find_periodic_orbit(&c, 2, &BounceConfiguration::new(vec![0.1, 0.1])),
        Err(SearchError::DegenerateChord)
    ));
}

#[test]
fn doubled_orbit_is_not_primitive() {
    let c = Table::circle();
    let seed = BounceConfiguration::new(vec![0.1, 0.6, 0.1, 0.6]);
    assert_eq!(
        find_periodic_orbit(&c, 4, &seed).unwrap_err(),
        SearchError::NotPrimitive { period: 2 }
    );
}

#[test]
fn multistart_on_the_circle_finds_inscribed_polygons() {
    let c = Table::circle();
    let orbits = multistart_search(&c, 4, 200, 7);
    for n in 2..=4 {
        let want = circle_chord_length(n);
        assert!(
            orbits.iter().any(|o| o.tau() == n && (o.length - want).abs() < 1e-9),
            "period {n} missing"
        );
    }
    for o in &orbits {
        assert!(o.residual <= RESIDUAL_TOL);
        assert!(o.closure_gap(&c) <= CLOSURE_TOL);
    }
}

#[test]
fn multistart_on_the_square_gives_the_two_midpoint_orbits() {
    let sq = Table::unit_square();
    let orbits = multistart_search(&sq, 2, 50, 7);
    assert_eq!(orbits.len(), 2, "{:?}", orbits.iter().map(|o| &o.config.params).collect::<Vec<_>>());
    let mut params: Vec<Vec<f64>> = orbits
        .iter()
        .map(|o| {
            let mut p = o.config.params.clone();
            p.sort_by(f64::total_cmp);
            p
        })
        .collect();
    params.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for (got, want) in params.iter().zip([[0.125, 0.625], [0.375, 0.875]]) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?}");
        }
    }
}

#[test]
fn multistart_edge_cases() {
    let c = Table::circle();
    assert!(multistart_search(&c, 4, 0, 1).is_empty());
    assert!(multistart_search(&c, 1, 10, 1).is_empty());
}

#[test]
fn multistart_is_deterministic_and_deduplicated() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let a = multistart_search(&e, 4, 40, 3);
    let b = multistart_search(&e, 4, 40, 3);
    assert_eq!(a, b);
    let per = e.perimeter();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            assert!(!same_orbit(&a[i].config, &a[j].config, per));
        }
        assert!(a[i].residual <= RESIDUAL_TOL && a[i].closure_gap(&e) <= CLOSURE_TOL);
    }
    for w in a.windows(2) {
        assert!((w[0].tau(), w[0].length) <= (w[1].tau(), w[1].length));
    }
}

#[test]
fn same_orbit_up_to_shift_and_reversal() {
    let a = BounceConfiguration::new(vec![0.1, 0.4, 0.7]);
    assert!(same_orbit(&a, &a.rotated(1), 1.0));
    assert!(same_orbit(&a, &a.reversed(), 1.0));
    assert!(same_orbit(&a, &BounceConfiguration::new(vec![0.1 + 5e-7, 0.4, 0.7]), 1.0));
    assert!(!same_orbit(&a, &BounceConfiguration::new(vec![0.1 + 2e-6, 0.4, 0.7]), 1.0));
}

#[test]
fn inadmissible_cells_and_zero_budget() {
    let sq = Table::unit_square();
    let mut grid = PhaseCell::grid(2, 2);
    grid.push(PhaseCell::new([0.1, 0.2], [-PI, 0.0]));
    let r = density_scan(&sq, &grid, 10, 0);
    assert_eq!(r.cells[4].status, CellStatus::Inadmissible);
    assert_eq!(r.admissible, 4);
    assert!(r.cells[..4].iter().all(|c| c.status == CellStatus::Uncovered && c.attempts == 0));
    assert_eq!(r.coverage, 0.0);
}

#[test]
fn covered_cells_have_witnesses_inside() {
    let sq = Table::unit_square();
    let grid = PhaseCell::grid(4, 3);
    let r = density_scan(&sq, &grid, 20, 120);
    assert_eq!(r.coverage, 1.0);
    for c in &r.cells {
        let o = &r.orbits[c.witness.unwrap()];
        assert!(o.phase_points.iter().any(|p| c.cell.contains(p.s, p.angle(&sq))));
        assert!(o.residual <= RESIDUAL_TOL && o.closure_gap(&sq) <= CLOSURE_TOL);
        assert!(o.tau() <= 20);
    }
}

#[test]
fn coverage_is_monotone_in_budget() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let grid = PhaseCell::grid(3, 3);
    let mut prev: Vec<bool> = vec![false; grid.len()];
    for budget in [0, 9, 27, 54] {
        let r = density_scan(&e, &grid, 8, budget);
        let now: Vec<bool> = r.cells.iter().map(|c| c.status == CellStatus::Covered).collect();
        for (p, n) in prev.iter().zip(&now) {
            assert!(!p || *n);
        }
        prev = now;
    }
    assert!(prev.iter().any(|c| *c));
}

fn ellipse_minor_orbit(e: &Table) -> PeriodicOrbit {
    // The lowest point starts the parametrization: the minor axis is [0, 1/2].
    find_periodic_orbit(e, 2, &BounceConfiguration::new(vec![0.01, 0.49])).unwrap()
}

#[test]
fn zero_bump_does_not_move_the_orbit() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let o = ellipse_minor_orbit(&e);
    let r = persistence_test(&e, &o, &CurvatureBump::plateau(0.1, 0.05, 0.0)).unwrap();
    assert_eq!(r.displacement, 0.0);
    assert_eq!(r.orbit.config, o.config);
}

#[test]
fn ellipse_minor_axis_orbit_persists() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let o = ellipse_minor_orbit(&e);
    assert!(o.hessian.as_ref().unwrap().nondegenerate);
    let s0 = o.config.params[0];
    let mut ratios = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let r = persistence_test(&e, &o, &CurvatureBump::plateau(s0 + 0.02, 0.05, eps)).unwrap();
        assert!(r.displacement <= 10.0 * eps, "{eps}: {}", r.displacement);
        assert!(r.displacement > 0.0);
        ratios.push(r.ratio);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(*x), h.max(*x)));
    assert!(hi <= 2.0 * lo, "{ratios:?}");
}

#[test]
fn bump_away_from_a_smoothed_square_orbit_changes_nothing() {
    let r0 = 0.01;
    let sq = Table::unit_square().smooth_corners(r0, None).unwrap();
    let k = 1.0 / (1.0 - 8.0 * r0 + 2.0 * PI * r0);
    let at = |x: f64, y: f64| sq.project(&crate::geom::vec2(x * k, y * k));
    let seed = BounceConfiguration::new(vec![at(0.125, 0.0), at(0.125, 0.25)]);
    let o = find_periodic_orbit(&sq, 2, &seed).unwrap();
    assert!(o.residual <= RESIDUAL_TOL);
    let left = at(0.0, 0.125);
    let r = persistence_test(&sq, &o, &CurvatureBump::plateau(left, 0.02, 1e-3)).unwrap();
    assert_eq!(r.displacement, 0.0);
}
