//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use billiard_core::geom::vec2;
use billiard_core::metric::{alpha_between, alpha_distance, sample_unit_tangent_bundle, BundlePoint, BundleSample};
use billiard_core::search::{
    density_scan, find_periodic_orbit, multistart_search, persistence_test, PeriodicOrbit, PhaseCell, CLOSURE_TOL,
    RESIDUAL_TOL,
};
use billiard_core::table::{ApproxOptions, CurvatureBump, Table};
use billiard_core::variational::{
    curvature_sensitivity, gradient_residual, hessian_entries, hessian_matrix, length_functional, length_gradient,
    BounceConfiguration,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Every orbit produced by any criterion, with the table it lives on.
#[derive(Default)]
struct Produced(Vec<(Table, PeriodicOrbit)>);

impl Produced {
    fn add(&mut self, table: &Table, orbits: impl IntoIterator<Item = PeriodicOrbit>) {
        self.0.extend(orbits.into_iter().map(|o| (table.clone(), o)));
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, t: Instant) -> Result<Duration, String> {
    let e = t.elapsed();
    if e < limit {
        Ok(e)
    } else {
        Err(format!("took {e:.2?}, limit {limit:?}"))
    }
}

fn ellipse() -> Table {
    Table::ellipse(2.0, 1.0).unwrap()
}

fn minor_axis_orbit(e: &Table) -> PeriodicOrbit {
    find_periodic_orbit(e, 2, &BounceConfiguration::new(vec![0.01, 0.49])).unwrap()
}

fn circle_orbits(all: &mut Produced) -> Outcome {
    let c = Table::circle();
    let r = 1.0 / TAU;
    let t = Instant::now();
    let orbits = multistart_search(&c, 5, 100, 7);
    let elapsed = within(Duration::from_secs(10), t)?;
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for n in 2..=5 {
        let want = n as f64 * 2.0 * r * (PI / n as f64).sin();
        match orbits
            .iter()
            .filter(|o| o.tau() == n)
            .map(|o| (o.length - want).abs())
            .min_by(f64::total_cmp)
        {
            Some(err) if err <= 1e-9 => worst = worst.max(err),
            _ => missing.push(n),
        }
    }
    all.add(&c, orbits);
    check(
        missing.is_empty(),
        format!("periods 2..5 found, worst length error {worst:.1e}, missing {missing:?}, {elapsed:.2?}"),
    )
}

fn certificates(all: &Produced) -> Outcome {
    let mut bad = 0;
    let (mut worst_res, mut worst_gap): (f64, f64) = (0.0, 0.0);
    for (table, o) in &all.0 {
        let res = gradient_residual(table, &o.config).unwrap_or(f64::INFINITY);
        let gap = o.closure_gap(table);
        worst_res = worst_res.max(res);
        worst_gap = worst_gap.max(gap);
        if !(res <= RESIDUAL_TOL && gap <= CLOSURE_TOL) {
            bad += 1;
        }
    }
    check(
        bad == 0 && !all.0.is_empty(),
        format!(
            "{} orbits, {bad} failures, worst residual {worst_res:.1e}, worst closure {worst_gap:.1e}",
            all.0.len()
        ),
    )
}

fn fd_gradient(t: &Table, p: &[f64], h: f64) -> Vec<f64> {
    let l = |q: &[f64]| length_functional(t, &BounceConfiguration::new(q.to_vec())).unwrap();
    (0..p.len())
        .map(|i| {
            let (mut a, mut b) = (p.to_vec(), p.to_vec());
            a[i] += h;
            b[i] -= h;
            (l(&a) - l(&b)) / (2.0 * h)
        })
        .collect()
}

fn fd_hessian(t: &Table, p: &[f64], h: f64) -> DMatrix<f64> {
    let l = |q: &[f64]| length_functional(t, &BounceConfiguration::new(q.to_vec())).unwrap();
    let n = p.len();
    let at = |i: usize, di: f64, j: usize, dj: f64| {
        let mut q = p.to_vec();
        q[i] += di;
        q[j] += dj;
        l(&q)
    };
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (at(i, h, i, 0.0) - 2.0 * l(p) + at(i, -h, i, 0.0)) / (h * h)
        } else {
            (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h)
        }
    })
}

fn derivative_oracle(all: &mut Produced) -> Outcome {
    let e = ellipse();
    let t = Instant::now();
    let base = multistart_search(&e, 4, 30, 11);
    if base.is_empty() {
        return Err("no ellipse orbits to perturb".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let o = &base[rng.gen_range(0..base.len())];
        let p: Vec<f64> = o.config.params.iter().map(|s| s + rng.gen_range(-1e-3..1e-3)).collect();
        let c = BounceConfiguration::new(p.clone());
        let g = length_gradient(&e, &c).unwrap();
        let gf = fd_gradient(&e, &p, 1e-6);
        let scale = gf.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = g.iter().zip(&gf).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_g = worst_g.max(err / scale);
        let (a, b) = hessian_entries(&e, &c).unwrap();
        let h = hessian_matrix(&a, &b);
        let hf = fd_hessian(&e, &p, 1e-4);
        worst_h = worst_h.max((&h - &hf).amax() / hf.amax());
    }
    all.add(&e, base);
    let elapsed = within(Duration::from_secs(30), t)?;
    check(
        worst_g <= 1e-6 && worst_h <= 1e-5,
        format!("worst relative gradient error {worst_g:.1e}, Hessian {worst_h:.1e}, {elapsed:.2?}"),
    )
}

fn hessian_structure() -> Outcome {
    let e = ellipse();
    let (a, b) = hessian_entries(&e, &BounceConfiguration::new(vec![0.0, 0.5])).unwrap();
    let h2 = hessian_matrix(&a, &b);
    let two = h2 == DMatrix::from_row_slice(2, 2, &[a[0], b[0] + b[1], b[0] + b[1], a[1]]);
    let c5 = BounceConfiguration::new((0..5).map(|k| 0.03 + 0.2 * k as f64).collect());
    let (a, b) = hessian_entries(&e, &c5).unwrap();
    let h5 = hessian_matrix(&a, &b);
    let mut mismatches = 0;
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j {
                a[i]
            } else if j == (i + 1) % 5 {
                b[i]
            } else if i == (j + 1) % 5 {
                b[j]
            } else {
                0.0
            };
            if h5[(i, j)] != want {
                mismatches += 1;
            }
        }
    }
    check(
        two && mismatches == 0,
        format!("2x2 shape {}, 5x5 entries off pattern: {mismatches}", if two { "exact" } else { "wrong" }),
    )
}

fn det2(t: &Table, c: &BounceConfiguration) -> f64 {
    let (a, b) = hessian_entries(t, c).unwrap();
    hessian_matrix(&a, &b).determinant()
}

fn degeneracy(all: &mut Produced) -> Outcome {
    let c = Table::circle();
    let diameter = find_periodic_orbit(&c, 2, &BounceConfiguration::new(vec![0.2, 0.7])).unwrap();
    let dc = det2(&c, &diameter.config).abs();
    let e = ellipse();
    let minor = minor_axis_orbit(&e);
    let major = find_periodic_orbit(&e, 2, &BounceConfiguration::new(vec![0.26, 0.74])).unwrap();
    let (dm, dj) = (det2(&e, &minor.config).abs(), det2(&e, &major.config).abs());
    let ok = dc < 1e-8 && dm > 1e-6 && dj > 1e-6;
    all.add(&c, [diameter]);
    all.add(&e, [minor, major]);
    check(
        ok,
        format!("circle diameter |det| {dc:.1e}; ellipse minor axis {dm:.3e}, major axis {dj:.3e}"),
    )
}

fn curvature_linearity() -> Outcome {
    let e = ellipse();
    let o = minor_axis_orbit(&e);
    let deltas = [-4.0, -2.0, 0.0, 2.0, 4.0];
    let rows = curvature_sensitivity(&e, &o.config, 0, &deltas).map_err(|e| e.to_string())?;
    let (n, sx, sy) = (5.0, deltas.iter().sum::<f64>(), rows.iter().map(|r| r.a_i).sum::<f64>());
    let sxx: f64 = deltas.iter().map(|x| x * x).sum();
    let sxy: f64 = deltas.iter().zip(&rows).map(|(x, r)| x * r.a_i).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let icpt = (sy - slope * sx) / n;
    let scale = rows.iter().fold(0.0f64, |m, r| m.max(r.a_i.abs()));
    let resid = deltas
        .iter()
        .zip(&rows)
        .fold(0.0f64, |m, (x, r)| m.max((r.a_i - (icpt + slope * x)).abs()))
        / scale;
    let base = &rows[2].b;
    let db = rows
        .iter()
        .flat_map(|r| r.b.iter().zip(base).map(|(x, y)| (x - y).abs()))
        .fold(0.0f64, f64::max);
    check(
        resid <= 1e-5 && db <= 1e-9,
        format!("slope {slope:.6}, relative residual {resid:.1e}, b change {db:.1e}"),
    )
}

fn density(all: &mut Produced) -> Outcome {
    let sq = Table::unit_square();
    let t = Instant::now();
    let r = density_scan(&sq, &PhaseCell::grid(10, 10), 40, 5000);
    let elapsed = within(Duration::from_secs(60), t)?;
    let ok = r.coverage >= 0.95;
    let detail = format!(
        "coverage {:.2} ({}/{} admissible cells), {elapsed:.2?}",
        r.coverage, r.covered, r.admissible
    );
    all.add(&sq, r.orbits);
    check(ok, detail)
}

fn smoothing_keeps_orbit(all: &mut Produced) -> Outcome {
    let sq = Table::unit_square();
    // Vertical chord at x = 0.1, 0.1 and 0.15 away from the corners.
    let o = find_periodic_orbit(&sq, 2, &BounceConfiguration::new(vec![0.1, 0.65])).unwrap();
    let clearance = o.config.params.iter().map(|&s| sq.corner_distance(s)).fold(1.0, f64::min);
    let rho = 1e-3;
    let smooth = sq.smooth_corners(rho, None).unwrap();
    // Each corner loses two trims of length rho and gains a quarter circle.
    let k = 1.0 / (1.0 - 8.0 * rho + 2.0 * PI * rho);
    let moved: Vec<_> = o.config.params.iter().map(|&s| k * sq.point(s)).collect();
    let params: Vec<f64> = moved.iter().map(|x| smooth.project(x)).collect();
    let drift = params
        .iter()
        .zip(&moved)
        .fold(0.0f64, |m, (&s, x)| m.max((smooth.point(s) - x).norm()));
    let kept = find_periodic_orbit(&smooth, 2, &BounceConfiguration::new(params.clone()))
        .map_err(|e| e.to_string())?;
    let unchanged = kept.config.params == params;
    let ok = clearance >= 0.05 && drift <= 1e-12 && kept.residual <= RESIDUAL_TOL && unchanged;
    let detail = format!(
        "clearance {clearance:.3}, bounce drift {drift:.1e}, residual {:.1e}, Newton {}",
        kept.residual,
        if unchanged { "took no step" } else { "moved the orbit" }
    );
    all.add(&smooth, [kept]);
    check(ok, detail)
}

fn persistence(all: &mut Produced) -> Outcome {
    let e = ellipse();
    let o = minor_axis_orbit(&e);
    let center = o.config.params[0] + 0.02;
    let mut ratios = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let r = persistence_test(&e, &o, &CurvatureBump::plateau(center, 0.05, eps)).map_err(|e| e.to_string())?;
        let perturbed = e.perturb_curvature(&CurvatureBump::plateau(center, 0.05, eps)).unwrap().table;
        ratios.push(r.ratio);
        all.add(&perturbed, [r.orbit]);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    check(
        lo > 0.0 && hi <= 2.0 * lo,
        format!("displacement/eps at 1e-3, 1e-4, 1e-5: {:.4}, {:.4}, {:.4}", ratios[0], ratios[1], ratios[2]),
    )
}

fn random_table(rng: &mut ChaCha8Rng) -> Table {
    if rng.gen_bool(0.5) {
        Table::ellipse(rng.gen_range(1.0..3.0), rng.gen_range(0.5..1.5)).unwrap()
    } else {
        let n = rng.gen_range(3..8);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let verts: Vec<_> = angles
            .iter()
            .map(|a| rng.gen_range(0.5..1.0) * vec2(a.cos(), a.sin()))
            .collect();
        Table::build_polygon(&verts).unwrap_or_else(|_| Table::unit_square())
    }
}

fn metric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k: Vec<BundleSample> = (0..3)
            .map(|_| sample_unit_tangent_bundle(&random_table(&mut rng), 64).unwrap())
            .collect();
        let d = |i: usize, j: usize| alpha_distance(&k[i], &k[j]).unwrap();
        worst = worst
            .max(d(0, 0))
            .max((d(0, 1) - d(1, 0)).abs())
            .max(d(0, 2) - d(0, 1) - d(1, 2))
            .max(d(1, 2) - d(1, 0) - d(0, 2));
    }
    let sq = Table::unit_square();
    let base = sample_unit_tangent_bundle(&sq, 1024).unwrap();
    let d = (2f64).powi(-12);
    let shifted = BundleSample::from_points(
        base.points
            .iter()
            .map(|p| BundlePoint {
                x: p.x + vec2(0.0, d),
                u: p.u,
            })
            .collect(),
        "shifted",
    );
    let translated = alpha_distance(&base, &shifted).unwrap();
    let mut smooth = Vec::new();
    for rho in [1e-2, 1e-3] {
        let a = alpha_between(&sq, &sq.smooth_corners(rho, None).unwrap(), 10_000).unwrap();
        smooth.push((rho, a));
    }
    let ok = worst <= 1e-12 && translated == d && smooth.iter().all(|(rho, a)| *a <= 4.0 * rho);
    check(
        ok,
        format!(
            "axiom violation {worst:.1e}; translation by {d:e} gives {translated:e}; smoothed square {:.2e} (rho 1e-2), {:.2e} (rho 1e-3)",
            smooth[0].1, smooth[1].1
        ),
    )
}

fn approximation() -> Outcome {
    let c = Table::circle();
    let a = c
        .approximate_by_rational_polygon(0.05, &ApproxOptions::default())
        .map_err(|e| e.to_string())?;
    let rational = a.table.is_rational() && a.table.check_rational_angles(1e-12);
    let alpha = alpha_between(&c, &a.table, 10_000).unwrap();
    check(
        rational && alpha <= 0.05,
        format!(
            "{} vertices, angles k*pi/{}, rational check {}, alpha {alpha:.2e}",
            a.vertices,
            a.denominator,
            if rational { "passed" } else { "failed" }
        ),
    )
}

fn run(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(format!(
            "panicked: {}",
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default()
        )),
    }
}

fn main() {
    let mut all = Produced::default();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "circle inscribed polygon orbits", run(|| circle_orbits(&mut all))),
        (3, "gradient and Hessian against finite differences", run(|| derivative_oracle(&mut all))),
        (4, "Hessian shapes", run(hessian_structure)),
        (5, "degenerate circle, nondegenerate ellipse", run(|| degeneracy(&mut all))),
        (6, "curvature linearity of the diagonal", run(curvature_linearity)),
        (7, "phase-space coverage on the square", run(|| density(&mut all))),
        (8, "smoothing keeps a square orbit", run(|| smoothing_keeps_orbit(&mut all))),
        (9, "persistence under boundary bumps", run(|| persistence(&mut all))),
        (10, "tangent-bundle metric", run(metric)),
        (11, "rational approximation of the circle", run(approximation)),
    ];
    results.insert(1, (2, "certificates on every orbit", run(|| certificates(&all))));
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
