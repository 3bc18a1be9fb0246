//! Follow the minor-axis orbit of an ellipse through shrinking boundary
//! bumps; the displacement scales with the bump amplitude.

use billiard_core::search::{find_periodic_orbit, persistence_test};
use billiard_core::table::{CurvatureBump, Table};
use billiard_core::variational::BounceConfiguration;

fn main() {
    let ellipse = Table::ellipse(2.0, 1.0).expect("valid ellipse");
    let orbit = find_periodic_orbit(&ellipse, 2, &BounceConfiguration::new(vec![0.01, 0.49])).expect("axis orbit");
    let center = orbit.config.params[0] + 0.02;
    println!("{:>8}  {:>12}  {:>8}", "amp", "displacement", "ratio");
    for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let r = persistence_test(&ellipse, &orbit, &CurvatureBump::plateau(center, 0.05, eps)).expect("persists");
        println!("{eps:>8.0e}  {:>12.4e}  {:>8.4}", r.displacement, r.ratio);
    }
}
