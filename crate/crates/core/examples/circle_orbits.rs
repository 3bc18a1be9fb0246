//! Multistart search on the circle: every inscribed regular polygon is a
//! periodic orbit, so the lengths can be checked against chord geometry.

use std::f64::consts::{PI, TAU};

use billiard_core::search::multistart_search;
use billiard_core::table::Table;

fn main() {
    let circle = Table::circle();
    let r = 1.0 / TAU;
    let orbits = multistart_search(&circle, 5, 100, 7);
    println!("{} distinct orbits of period <= 5", orbits.len());
    for n in 2..=5 {
        let polygon = n as f64 * 2.0 * r * (PI / n as f64).sin();
        let count = orbits
            .iter()
            .filter(|o| o.tau() == n && (o.length - polygon).abs() < 1e-9)
            .count();
        let other: Vec<f64> = orbits
            .iter()
            .filter(|o| o.tau() == n && (o.length - polygon).abs() >= 1e-9)
            .map(|o| o.length)
            .collect();
        println!("period {n}: {count} rotations of the regular {n}-gon (length {polygon:.12}), {} others", other.len());
    }
}
