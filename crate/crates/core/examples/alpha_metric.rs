//! Hausdorff distance between unit tangent bundles of nearby tables.

use billiard_core::metric::alpha_between;
use billiard_core::table::Table;

fn main() {
    let square = Table::unit_square();
    for rho in [1e-1, 1e-2, 1e-3] {
        let smooth = square.smooth_corners(rho, None).expect("fillets fit");
        let a: Vec<String> = [100, 1_000, 10_000]
            .iter()
            .map(|&n| format!("{:.6e}", alpha_between(&square, &smooth, n).expect("enough samples")))
            .collect();
        println!("square vs fillet radius {rho:e}: n = 1e2, 1e3, 1e4 -> {}", a.join(", "));
    }
    let circle = Table::circle();
    for (a, b) in [(1.05, 1.0), (1.5, 1.0), (2.0, 1.0)] {
        let e = Table::ellipse(a, b).expect("valid ellipse");
        println!("circle vs ellipse {a}:{b}: {:.6e}", alpha_between(&circle, &e, 2_000).expect("enough samples"));
    }
}
