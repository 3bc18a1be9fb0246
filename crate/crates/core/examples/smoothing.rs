//! Round the corners of the square; a 2-orbit away from the corners keeps
//! its bounce points up to the rescaling to perimeter 1.

use std::f64::consts::PI;

use billiard_core::search::find_periodic_orbit;
use billiard_core::table::Table;
use billiard_core::variational::BounceConfiguration;

fn main() {
    let square = Table::unit_square();
    let orbit = find_periodic_orbit(&square, 2, &BounceConfiguration::new(vec![0.1, 0.65])).expect("orbit");
    for rho in [1e-2, 1e-3] {
        let smooth = square.smooth_corners(rho, None).expect("fillets fit");
        let k = 1.0 / (1.0 - 8.0 * rho + 2.0 * PI * rho);
        let params: Vec<f64> = orbit.config.params.iter().map(|&s| smooth.project(&(k * square.point(s)))).collect();
        let kept = find_periodic_orbit(&smooth, 2, &BounceConfiguration::new(params.clone())).expect("still an orbit");
        println!(
            "rho {rho:e}: {} corners left, params {:?}, residual {:.1e}, moved {}",
            smooth.corners().len(),
            kept.config.params,
            kept.residual,
            kept.config.params != params
        );
    }
    let subset = square.smooth_corners(0.02, Some(&[0, 2])).expect("fillets fit");
    println!("two corners rounded: {} corners remain", subset.corners().len());
}
