//! Draw the orbits found on an ellipse into an SVG file.

use billiard_core::cli::{render_svg, OrbitRecord, OrbitsReport};
use billiard_core::report::to_json;
use billiard_core::search::multistart_search;
use billiard_core::table::Table;

fn main() {
    let ellipse = Table::ellipse(2.0, 1.0).expect("valid ellipse");
    let orbits = multistart_search(&ellipse, 4, 40, 3);
    let report = OrbitsReport {
        table_id: ellipse.id(),
        tau_max: 4,
        seeds: 40,
        rng: 3,
        orbits: orbits.iter().map(|o| OrbitRecord::new(&ellipse, o)).collect(),
    };
    let svg = render_svg(&to_json(&report).expect("serializable"), &ellipse).expect("report matches table");
    let path = std::env::temp_dir().join("ellipse_orbits.svg");
    std::fs::write(&path, &svg).expect("writable temp dir");
    println!("{} orbits drawn to {}", orbits.len(), path.display());
}
