use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use super::*;
use crate::geom::vec2;

fn square() -> Table {
    Table::unit_square()
}

fn circle_points(n: usize, a: f64, b: f64) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            vec2(a * t.cos(), b * t.sin())
        })
        .collect()
}

#[test]
fn unit_square_has_quarter_sides() {
    let v = square().vertices().unwrap();
    let expected = [(0.0, 0.0), (0.25, 0.0), (0.25, 0.25), (0.0, 0.25)];
    for (p, (x, y)) in v.iter().zip(expected) {
        assert!((p - vec2(x, y)).norm() < 1e-15);
    }
    assert!((square().perimeter() - 1.0).abs() < 1e-15);
}

#[test]
fn right_triangle_sides() {
    let t = Table::build_polygon(&[vec2(0.0, 0.0), vec2(3.0, 0.0), vec2(0.0, 4.0)]).unwrap();
    let v = t.vertices().unwrap();
    let sides: Vec<f64> = (0..3).map(|i| (v[(i + 1) % 3] - v[i]).norm()).collect();
    let mut sorted = sides.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (s, e) in sorted.iter().zip([0.25, 1.0 / 3.0, 5.0 / 12.0]) {
        assert!((s - e).abs() < 1e-15);
    }
}

#[test]
fn too_few_vertices() {
    let err = Table::build_polygon(&[vec2(0.0, 0.0), vec2(1.0, 0.0)]).unwrap_err();
    assert!(matches!(err, TableError::DegenerateInput(_)));
}

#[test]
fn flat_and_crossing_polygons_are_degenerate() {
    let flat = [vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(2.0, 0.0), vec2(1.0, 1.0)];
    assert!(matches!(Table::build_polygon(&flat), Err(TableError::DegenerateInput(_))));
    let bowtie = [vec2(0.0, 0.0), vec2(1.0, 1.0), vec2(1.0, 0.0), vec2(0.0, 1.0)];
    assert!(matches!(Table::build_polygon(&bowtie), Err(TableError::DegenerateInput(_))));
}

#[test]
fn rational_square_and_triangle() {
    let sq = Table::build_rational_polygon(&RationalAngleSpec::equal_sides(&[(1, 2); 4])).unwrap();
    assert!(sq.is_rational());
    for (p, q) in sq.vertices().unwrap().iter().zip(square().vertices().unwrap()) {
        assert!((p - q).norm() < 1e-15);
    }
    let tri = Table::build_rational_polygon(&RationalAngleSpec::equal_sides(&[(1, 3); 3])).unwrap();
    let v = tri.vertices().unwrap();
    for i in 0..3 {
        assert!(((v[(i + 1) % 3] - v[i]).norm() - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!(tri.check_rational_angles(1e-10));
    let bad = Table::build_rational_polygon(&RationalAngleSpec::equal_sides(&[(1, 2); 3]));
    assert!(matches!(bad, Err(TableError::NonClosing(_))));
}

fn radial_deviation(t: &Table) -> f64 {
    let r = 1.0 / TAU;
    (0..4000)
        .map(|i| (t.point(i as f64 / 4000.0).norm() - r).abs())
        .fold(0.0, f64::max)
}

#[test]
fn spline_through_circle_points_stays_near_the_circle() {
    let t = Table::build_smooth_curve(&circle_points(12, 1.0, 1.0)).unwrap();
    assert!(t.corners().is_empty());
    assert!((t.perimeter() - 1.0).abs() < 1e-10);
    // A cubic through 12 nodes sits about 1.8e-5 off the circle; the error
    // falls like h^4, so 48 nodes are needed for 1e-6.
    let coarse = radial_deviation(&t);
    assert!(coarse < 2.5e-5, "deviation {coarse}");
    let fine = radial_deviation(&Table::build_smooth_curve(&circle_points(48, 1.0, 1.0)).unwrap());
    assert!(fine < 1e-6, "deviation {fine}");
    let ratio = coarse / fine;
    assert!(ratio > 150.0 && ratio < 350.0, "convergence ratio {ratio}");
}

#[test]
fn spline_through_ellipse_points_is_convex() {
    let t = Table::build_smooth_curve(&circle_points(12, 2.0, 1.0)).unwrap();
    for i in 0..1000 {
        let k = t.evaluate(i as f64 / 1000.0).unwrap().curvature;
        assert!(k > 0.0, "curvature {k} at sample {i}");
    }
}

#[test]
fn figure_eight_is_self_intersecting() {
    let pts: Vec<Vec2> = (0..16)
        .map(|i| {
            let t = TAU * i as f64 / 16.0;
            vec2(t.sin(), t.sin() * t.cos())
        })
        .collect();
    assert_eq!(Table::build_smooth_curve(&pts).unwrap_err(), TableError::SelfIntersecting);
}

#[test]
fn smoothing_square_corners() {
    let all = square().smooth_corners(0.01, None).unwrap();
    assert!(all.corners().is_empty());
    assert!((all.perimeter() - 1.0).abs() < 1e-12);
    let one = square().smooth_corners(0.01, Some(&[0])).unwrap();
    assert_eq!(one.corners().len(), 3);
    assert!(matches!(
        square().smooth_corners(0.25, None),
        Err(TableError::RadiusTooLarge { .. })
    ));
}

#[test]
fn fillets_are_tangent_continuous() {
    let t = square().smooth_corners(0.02, None).unwrap();
    for s in t.junction_params() {
        let a = t.frame_before(s).tangent;
        let b = t.frame_unchecked(s).tangent;
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn evaluate_examples() {
    let c = Table::circle();
    let f = c.evaluate(0.25).unwrap();
    assert!((f.curvature - TAU).abs() < 1e-12);
    assert!((f.point.norm() - 1.0 / TAU).abs() < 1e-15);
    assert_eq!(square().evaluate(0.1).unwrap().curvature, 0.0);
    assert_eq!(square().evaluate(0.25), Err(TableError::AtCorner { param: 0.25 }));
}

#[test]
fn corner_sets() {
    let cs = square().corner_set();
    assert_eq!(cs.len(), 4);
    for c in &cs {
        assert!(c.incoming.dot(&c.outgoing).abs() < 1e-15);
        assert!((c.turning() - PI / 2.0).abs() < 1e-15);
    }
    assert!(Table::circle().corner_set().is_empty());
    assert!(square().smooth_corners(0.01, None).unwrap().corner_set().is_empty());
}

#[test]
fn zero_amplitude_bump_is_identity() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let p = e.perturb_curvature(&CurvatureBump::plateau(0.3, 0.05, 0.0)).unwrap();
    assert_eq!(p.ratio, 1.0);
    assert_eq!(p.table.id(), e.id());
    assert_eq!(p.map_param(0.3), 0.3);
}

#[test]
fn circle_bump_is_local() {
    let c = Table::circle();
    let s0 = 0.4;
    let p = c.perturb_curvature(&CurvatureBump::plateau(s0, 0.05, 1e-3)).unwrap();
    assert!((p.table.perimeter() - 1.0).abs() < 1e-12);
    let k0 = p.raw_curvature(p.map_param(s0)).unwrap();
    assert!((k0 - TAU).abs() > 1e-3);
    // Tangent at the center keeps its direction.
    let t_old = c.evaluate(s0).unwrap().tangent;
    let t_new = p.table.evaluate(p.map_param(s0)).unwrap().tangent;
    assert!((t_old - t_new).norm() < 1e-9);
    for s in [s0 - 0.1, s0 + 0.1, 0.9, 0.05] {
        let k = p.raw_curvature(p.map_param(s)).unwrap();
        assert!((k - TAU).abs() < 1e-9, "curvature {k} at {s}");
        let x = p.table.point(p.map_param(s)) / p.ratio;
        assert!((x - c.point(s)).norm() < 1e-13);
    }
}

#[test]
fn bump_across_the_parameter_origin() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let p = e.perturb_curvature(&CurvatureBump::plateau(0.99, 0.04, 5e-4)).unwrap();
    for s in [0.2, 0.5, 0.9] {
        let x = p.table.point(p.map_param(s)) / p.ratio;
        assert!((x - e.point(s)).norm() < 1e-12);
    }
    let a = e.evaluate(0.99).unwrap().tangent;
    let b = p.table.evaluate(p.map_param(0.99)).unwrap().tangent;
    assert!((a - b).norm() < 1e-9);
}

#[test]
fn bump_on_a_corner_is_rejected() {
    let err = square().perturb_curvature(&CurvatureBump::plateau(0.25, 0.05, 1e-3)).unwrap_err();
    assert!(matches!(err, TableError::SupportHitsCorner { .. }));
}

#[test]
fn overlapping_bumps_are_rejected() {
    let c = Table::circle();
    let once = c.perturb_curvature(&CurvatureBump::plateau(0.5, 0.05, 1e-3)).unwrap();
    let err = once
        .table
        .perturb_curvature(&CurvatureBump::plateau(once.map_param(0.52), 0.05, 1e-3))
        .unwrap_err();
    assert!(matches!(err, TableError::SupportHitsCorner { .. }));
}

#[test]
fn huge_bump_folds_the_boundary() {
    let c = Table::circle();
    let err = c.perturb_curvature(&CurvatureBump::plateau(0.5, 0.05, 0.5)).unwrap_err();
    assert_eq!(err, TableError::SelfIntersecting);
}

#[test]
fn spec_round_trip() {
    let spec = TableSpec::SmoothedPolygon {
        vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
        fillet_radius: 0.1,
        corner_subset: Some(vec![1, 2]),
    };
    let text = spec.to_json();
    assert_eq!(TableSpec::from_json(&text).unwrap(), spec);
    let t = spec.build().unwrap();
    assert_eq!(t.corners().len(), 2);
    assert_eq!(t.source(), Some(&spec));
}

#[test]
fn rational_json_uses_fraction_pairs() {
    let text = r#"{"kind": "rational_polygon", "angles": [[1, 3], [1, 3], [1, 3]], "side_lengths": [1, 1, 1]}"#;
    let t = TableSpec::from_json(text).unwrap().build().unwrap();
    assert!(t.is_rational());
    assert_eq!(t.corners().len(), 3);
}

#[test]
fn homothety_scales_curvature() {
    let e = Table::ellipse(2.0, 1.0).unwrap();
    let big = e.with_homothety(3.0).unwrap();
    assert!((big.perimeter() - 3.0).abs() < 1e-12);
    for s in [0.1, 0.37] {
        let a = e.evaluate(s).unwrap();
        let b = big.evaluate(3.0 * s).unwrap();
        assert!((b.point - 3.0 * a.point).norm() < 1e-12);
        assert!((b.curvature * 3.0 - a.curvature).abs() < 1e-9);
    }
}

fn fd_tangent_check(t: &Table, s: f64) {
    let h = 1e-6;
    let f = t.evaluate(s).unwrap();
    let fd = (t.point(s + h) - t.point(s - h)) / (2.0 * h);
    assert!((f.tangent - fd).norm() < 1e-6, "tangent at {s}: {:?} vs {:?}", f.tangent, fd);
    assert!((f.tangent.norm() - 1.0).abs() < 1e-10);
}

fn fd_curvature_check(t: &Table, s: f64) {
    let h = 1e-4;
    let f = t.evaluate(s).unwrap();
    let second = (t.point(s + h) - 2.0 * f.point + t.point(s - h)) / (h * h);
    let k = crate::geom::cross(&f.tangent, &second);
    assert!((k - f.curvature).abs() < 1e-4 * (1.0 + f.curvature.abs()), "{k} vs {}", f.curvature);
}

fn smooth_tables() -> Vec<Table> {
    vec![
        Table::circle(),
        Table::ellipse(2.0, 1.0).unwrap(),
        Table::build_smooth_curve(&circle_points(9, 1.5, 1.0)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homothety_invariance(lambda in 0.01f64..100.0, dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
        let raw = [vec2(0.0, 0.0), vec2(2.0, 0.1), vec2(1.7 + dx, 1.3 + dy), vec2(0.2, 0.9)];
        let a = Table::build_polygon(&raw).unwrap();
        let scaled: Vec<Vec2> = raw.iter().map(|p| p * lambda).collect();
        let b = Table::build_polygon(&scaled).unwrap();
        for (p, q) in a.vertices().unwrap().iter().zip(b.vertices().unwrap()) {
            prop_assert!((p - q).norm() < 1e-12);
        }
        for (p, q) in a.corner_params().iter().zip(b.corner_params()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_matches_differences(s in 0.0f64..1.0, which in 0usize..5) {
        let t = match which {
            0..=2 => smooth_tables().swap_remove(which),
            3 => square(),
            _ => square().smooth_corners(0.03, Some(&[1, 3])).unwrap(),
        };
        prop_assume!(t.corner_distance(s) > 1e-5);
        fd_tangent_check(&t, s);
    }

    #[test]
    fn curvature_matches_differences(s in 0.0f64..1.0, which in 0usize..3) {
        let t = smooth_tables().swap_remove(which);
        fd_curvature_check(&t, s);
    }
}

#[test]
fn thousand_tangent_samples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let tables = [
        Table::ellipse(2.0, 1.0).unwrap(),
        square().smooth_corners(0.02, None).unwrap(),
    ];
    for t in &tables {
        let mut checked = 0;
        while checked < 1000 {
            let s: f64 = rng.gen();
            if t.corner_distance(s) > 1e-5 {
                fd_tangent_check(t, s);
                checked += 1;
            }
        }
    }
}

#[test]
fn smoothing_goes_through_the_loader_units() {
    let spec = TableSpec::SmoothedPolygon {
        vertices: vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]],
        fillet_radius: 0.04,
        corner_subset: None,
    };
    let a = spec.build().unwrap();
    let b = square().smooth_corners(0.04 / 16.0, None).unwrap();
    for i in 0..50 {
        let s = i as f64 / 50.0;
        assert!((a.point(s) - b.point(s)).norm() < 1e-14);
    }
}

#[test]
fn tables_are_shareable_across_threads() {
    fn assert_sync<T: Send + Sync>() {}
    assert_sync::<Table>();
}
