//! Hessian of the length functional at two-bounce orbits: the circle diameter
//! sits in a rotation family and is degenerate, the ellipse axes are not.

use billiard_core::search::find_periodic_orbit;
use billiard_core::table::Table;
use billiard_core::variational::{assemble_hessian, BounceConfiguration};

fn show(name: &str, table: &Table, seed: Vec<f64>) {
    let orbit = find_periodic_orbit(table, seed.len(), &BounceConfiguration::new(seed)).expect("orbit");
    let h = assemble_hessian(table, &orbit.config).expect("critical");
    println!("{name}: params {:?}", orbit.config.params);
    for row in h.rows() {
        println!("    {row:+.6?}");
    }
    println!(
        "    det {:+.6e}, eigenvalues {:.6?}, index {}, nondegenerate {}",
        h.det, h.eigenvalues, h.index, h.nondegenerate
    );
}

fn main() {
    let circle = Table::circle();
    let ellipse = Table::ellipse(2.0, 1.0).expect("valid ellipse");
    show("circle diameter", &circle, vec![0.2, 0.7]);
    show("ellipse minor axis", &ellipse, vec![0.01, 0.49]);
    show("ellipse major axis", &ellipse, vec![0.26, 0.74]);
    show("ellipse 4-orbit", &ellipse, vec![0.1, 0.35, 0.6, 0.85]);
}
