//! Cover a 10 x 10 grid of phase-space cells of the square with periodic
//! orbits of period at most 40.

use std::f64::consts::PI;

use billiard_core::search::{density_scan, CellStatus, PhaseCell};
use billiard_core::table::Table;

fn main() {
    let square = Table::unit_square();
    let mut grid = PhaseCell::grid(10, 10);
    // Directions pointing into the table are never admissible.
    grid.push(PhaseCell::new([0.3, 0.4], [-PI, -0.1]));
    let report = density_scan(&square, &grid, 40, 5000);
    println!(
        "coverage {:.3}: {} of {} admissible cells",
        report.coverage, report.covered, report.admissible
    );
    let mut periods: Vec<usize> = report.orbits.iter().map(|o| o.tau()).collect();
    periods.sort_unstable();
    periods.dedup();
    println!("witness periods {periods:?}");
    for c in report.cells.iter().filter(|c| c.status != CellStatus::Covered) {
        println!("cell s {:?} angle {:?}: {:?}", c.cell.s, c.cell.phi, c.status);
    }
}
