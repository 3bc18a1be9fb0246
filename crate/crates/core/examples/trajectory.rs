//! Iterate the billiard map on an ellipse and on the square.

use billiard_core::phase::{iterate, iterate_until_return, PhasePoint};
use billiard_core::table::Table;

fn main() {
    let ellipse = Table::ellipse(2.0, 1.0).expect("valid ellipse");
    let start = PhasePoint::from_angle(&ellipse, 0.1, 1.2).expect("not a corner");
    let traj = iterate(&ellipse, &start, 8);
    println!("ellipse, {} bounces, {:?}", traj.bounces(), traj.termination);
    for p in &traj.points {
        let x = ellipse.point(p.s);
        println!("  s = {:.6}  x = ({:+.6}, {:+.6})  angle = {:.6}", p.s, x.x, x.y, p.angle(&ellipse));
    }

    // Slope 1/2 on the square closes after 2 (1 + 2) = 6 bounces.
    let square = Table::unit_square();
    let v = nalgebra::Vector2::new(1.0, -2.0).normalize();
    let traj = iterate_until_return(&square, &PhasePoint::new(0.05, v), 50, 1e-12);
    println!("square, slope 2 returns after {} bounces ({:?})", traj.bounces(), traj.termination);
}
