//! Approximate smooth tables by polygons whose angles are rational multiples
//! of pi.

use billiard_core::metric::alpha_between;
use billiard_core::table::{ApproxOptions, Table};

fn main() {
    let tables = [
        ("circle", Table::circle()),
        ("ellipse", Table::ellipse(2.0, 1.0).expect("valid ellipse")),
        ("smoothed square", Table::unit_square().smooth_corners(0.02, None).expect("fillets fit")),
    ];
    for (name, table) in &tables {
        for tol in [0.1, 0.05] {
            let a = table
                .approximate_by_rational_polygon(tol, &ApproxOptions::default())
                .expect("tolerance reachable");
            let check = alpha_between(table, &a.table, 10_000).expect("enough samples");
            println!(
                "{name:>15} tol {tol}: {:>4} vertices, angles k pi/{:<4} alpha {:.3e} (resampled {:.3e}), rational {}",
                a.vertices,
                a.denominator,
                a.alpha,
                check,
                a.table.check_rational_angles(1e-12)
            );
        }
    }
}
