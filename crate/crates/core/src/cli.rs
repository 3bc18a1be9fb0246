//! Command-line front end. Every command reads a table definition file and
//! writes a JSON report (SVG for `render`) to `--out` or standard output.
//!
//! Exit status: 0 on success, 1 when the computation itself fails, 2 for
//! malformed invocations and unreadable inputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::metric::alpha_between;
use crate::phase::{iterate, PhasePoint, Termination};
use crate::report::to_json;
use crate::search::{
    density_scan_seeded, find_periodic_orbit, multistart_search, persistence_test, CellReport, PeriodicOrbit,
    PhaseCell,
};
use crate::table::{ApproxOptions, BumpProfile, CurvatureBump, Table};
use crate::variational::{assemble_hessian, gradient_residual, BounceConfiguration, HessianData};

#[derive(Debug, Parser)]
#[command(name = "billiard", version, about = "Periodic orbits of planar billiard tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Table definition (JSON).
    #[arg(long)]
    pub table: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the billiard map from one phase point.
    Map {
        #[command(flatten)]
        common: Common,
        /// Arc-length parameter of the start point.
        #[arg(long)]
        s: f64,
        /// Direction angle from the tangent toward the outward normal, in [0, pi].
        #[arg(long, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Multistart search for periodic orbits of period 2..=tau.
    Orbits {
        #[command(flatten)]
        common: Common,
        #[arg(long, alias = "tau-max")]
        tau: usize,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long)]
        rng: u64,
    },
    /// Polish a configuration to a critical point and report its Hessian.
    Hessian {
        #[command(flatten)]
        common: Common,
        /// Comma-separated bounce parameters.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        config: Vec<f64>,
    },
    /// Coverage of a phase-space grid by periodic orbits.
    Density {
        #[command(flatten)]
        common: Common,
        /// Grid shape as `<cells in s>x<cells in angle>`.
        #[arg(long, value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long)]
        tau_max: usize,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        rng: u64,
    },
    /// Follow an orbit through a local bump of the boundary.
    Persist {
        #[command(flatten)]
        common: Common,
        /// Seed for the orbit on the unperturbed table.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        config: Vec<f64>,
        #[arg(long)]
        center: f64,
        #[arg(long)]
        half_width: f64,
        #[arg(long, allow_hyphen_values = true)]
        amplitude: f64,
        #[arg(long, value_enum, default_value_t = Profile::Plateau)]
        profile: Profile,
    },
    /// Distance between the unit tangent bundles of two tables.
    Alpha {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Round corners with circular fillets; writes a table definition.
    Smooth {
        #[command(flatten)]
        common: Common,
        /// Fillet radius on the perimeter-1 table.
        #[arg(long)]
        radius: f64,
        /// Comma-separated corner indices; all corners when omitted.
        #[arg(long, value_delimiter = ',')]
        corners: Option<Vec<usize>>,
    },
    /// Rational polygon within `tol`; writes a table definition.
    Approx {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tol: f64,
        /// Also write a summary report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// SVG of the table with the chords of an orbit or trajectory report.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Plateau,
    Pinned,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected <n>x<m>")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a == 0 || b == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((a, b))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub s: f64,
    pub x: [f64; 2],
    pub v: [f64; 2],
}

impl PointRecord {
    fn new(table: &Table, p: &PhasePoint) -> Self {
        let x = table.point(p.s);
        Self {
            s: p.s,
            x: [x.x, x.y],
            v: [p.v.x, p.v.y],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub table_id: String,
    pub points: Vec<PointRecord>,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub tau: usize,
    pub params: Vec<f64>,
    pub length: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian: Option<HessianData>,
    pub phase_points: Vec<PointRecord>,
}

impl OrbitRecord {
    pub fn new(table: &Table, o: &PeriodicOrbit) -> Self {
        Self {
            tau: o.tau(),
            params: o.config.params.clone(),
            length: o.length,
            residual: o.residual,
            hessian: o.hessian.clone(),
            phase_points: o.phase_points.iter().map(|p| PointRecord::new(table, p)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitsReport {
    pub table_id: String,
    pub tau_max: usize,
    pub seeds: usize,
    pub rng: u64,
    pub orbits: Vec<OrbitRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianReport {
    pub table_id: String,
    pub params: Vec<f64>,
    pub residual: f64,
    #[serde(flatten)]
    pub hessian: HessianData,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub table_id: String,
    pub rng: u64,
    pub tau_max: usize,
    pub budget: usize,
    pub admissible: usize,
    pub covered: usize,
    pub coverage: f64,
    pub cells: Vec<CellReport>,
    pub orbits: Vec<OrbitRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistReport {
    pub table_id: String,
    pub perturbed_table_id: String,
    pub original: OrbitRecord,
    pub orbit: OrbitRecord,
    pub displacement: f64,
    pub amplitude: f64,
    pub ratio: f64,
    pub homothety: f64,
    pub nondegenerate: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaReport {
    pub table_id: String,
    pub other_table_id: String,
    pub n: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxReport {
    pub table_id: String,
    pub polygon_id: String,
    pub tol: f64,
    pub vertices: usize,
    pub denominator: i64,
    pub alpha: f64,
    pub max_turn_discrepancy: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("report belongs to table {found}, not {expected}")]
    MismatchedReport { expected: String, found: String },
    #[error("malformed report: {0}")]
    Malformed(String),
}

/// Shape of any report `render` understands: an orbit list, a single orbit
/// (`params`), a persistence run (`orbit`), or a trajectory (`points`).
#[derive(Deserialize)]
struct RenderInput {
    table_id: String,
    #[serde(default)]
    orbits: Option<Vec<ParamsOnly>>,
    #[serde(default)]
    params: Option<Vec<f64>>,
    #[serde(default)]
    orbit: Option<ParamsOnly>,
    #[serde(default)]
    points: Option<Vec<PointRecord>>,
}

#[derive(Deserialize)]
struct ParamsOnly {
    params: Vec<f64>,
}

fn fmt_point(out: &mut String, p: &Vec2, flip: f64) {
    write!(out, "{:.6} {:.6}", p.x, flip - p.y).unwrap();
}

/// SVG 1.1 drawing of the boundary as one closed path plus one line per chord.
pub fn render_svg(report: &str, table: &Table) -> Result<String, RenderError> {
    let input: RenderInput = serde_json::from_str(report).map_err(|e| RenderError::Malformed(e.to_string()))?;
    if input.table_id != table.id() {
        return Err(RenderError::MismatchedReport {
            expected: table.id(),
            found: input.table_id,
        });
    }
    let mut chords: Vec<(Vec2, Vec2)> = Vec::new();
    let mut closed = |params: &[f64]| {
        let x: Vec<Vec2> = params.iter().map(|&s| table.point(s)).collect();
        for i in 0..x.len() {
            chords.push((x[i], x[(i + 1) % x.len()]));
        }
    };
    if let Some(orbits) = &input.orbits {
        orbits.iter().for_each(|o| closed(&o.params));
    }
    if let Some(p) = &input.params {
        closed(p);
    }
    if let Some(o) = &input.orbit {
        closed(&o.params);
    }
    if let Some(points) = &input.points {
        for w in points.windows(2) {
            chords.push((Vec2::new(w[0].x[0], w[0].x[1]), Vec2::new(w[1].x[0], w[1].x[1])));
        }
    }

    let boundary = table.polyline();
    let (mut lo, mut hi) = (boundary[0], boundary[0]);
    for p in &boundary {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let margin = 0.05 * (hi - lo).max();
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    // SVG's y axis points down; flip about the top of the box.
    let flip = hi.y + lo.y;
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.6} {:.6} {:.6} {:.6}" width="600" height="{:.0}">"#,
        lo.x - margin,
        lo.y - margin,
        w,
        h,
        600.0 * h / w
    )
    .unwrap();
    let stroke = 0.004 * w.max(h);
    let mut d = String::from("M ");
    for (i, p) in boundary.iter().enumerate() {
        if i > 0 {
            d.push_str(" L ");
        }
        fmt_point(&mut d, p, flip);
    }
    d.push_str(" Z");
    writeln!(
        out,
        r#"  <path d="{d}" fill="none" stroke="black" stroke-width="{stroke:.6}"/>"#
    )
    .unwrap();
    for (a, b) in &chords {
        writeln!(
            out,
            r#"  <line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="crimson" stroke-width="{:.6}"/>"#,
            a.x,
            flip - a.y,
            b.x,
            flip - b.y,
            0.5 * stroke
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn load(path: &Path) -> Result<Table, CliError> {
    Table::load(path).map_err(usage)
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    to_json(value).map_err(domain)
}

fn seed_config(table: &Table, config: &[f64]) -> Result<PeriodicOrbit, CliError> {
    if config.len() < 2 {
        return Err(usage("--config needs at least two parameters"));
    }
    find_periodic_orbit(table, config.len(), &BounceConfiguration::new(config.to_vec())).map_err(domain)
}

/// Runs one command.
pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Map { common, s, angle, steps } => {
            let table = load(&common.table)?;
            if !(0.0..=std::f64::consts::PI).contains(&angle) {
                return Err(domain(format!("angle {angle} is not an admissible direction")));
            }
            let start = PhasePoint::from_angle(&table, s, angle).map_err(domain)?;
            let traj = iterate(&table, &start, steps);
            let report = TrajectoryReport {
                table_id: table.id(),
                points: traj.points.iter().map(|p| PointRecord::new(&table, p)).collect(),
                termination: traj.termination,
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Orbits { common, tau, seeds, rng } => {
            let table = load(&common.table)?;
            if tau < 2 {
                return Err(usage("--tau must be at least 2"));
            }
            let orbits = multistart_search(&table, tau, seeds, rng);
            let report = OrbitsReport {
                table_id: table.id(),
                tau_max: tau,
                seeds,
                rng,
                orbits: orbits.iter().map(|o| OrbitRecord::new(&table, o)).collect(),
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Hessian { common, config } => {
            let table = load(&common.table)?;
            let orbit = seed_config(&table, &config)?;
            let hessian = assemble_hessian(&table, &orbit.config).map_err(domain)?;
            let report = HessianReport {
                table_id: table.id(),
                residual: gradient_residual(&table, &orbit.config).map_err(domain)?,
                params: orbit.config.params,
                hessian,
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Density {
            common,
            grid,
            tau_max,
            budget,
            rng,
        } => {
            let table = load(&common.table)?;
            let cells = PhaseCell::grid(grid.0, grid.1);
            let r = density_scan_seeded(&table, &cells, tau_max, budget, rng);
            let report = DensityReport {
                table_id: table.id(),
                rng,
                tau_max,
                budget,
                admissible: r.admissible,
                covered: r.covered,
                coverage: r.coverage,
                orbits: r.orbits.iter().map(|o| OrbitRecord::new(&table, o)).collect(),
                cells: r.cells,
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Persist {
            common,
            config,
            center,
            half_width,
            amplitude,
            profile,
        } => {
            let table = load(&common.table)?;
            let orbit = seed_config(&table, &config)?;
            let bump = CurvatureBump {
                center,
                half_width,
                amplitude,
                profile: match profile {
                    Profile::Plateau => BumpProfile::Plateau,
                    Profile::Pinned => BumpProfile::Pinned,
                },
            };
            let r = persistence_test(&table, &orbit, &bump).map_err(domain)?;
            let perturbed = table.perturb_curvature(&bump).map_err(domain)?.table;
            let report = PersistReport {
                table_id: table.id(),
                perturbed_table_id: perturbed.id(),
                original: OrbitRecord::new(&table, &orbit),
                orbit: OrbitRecord::new(&perturbed, &r.orbit),
                displacement: r.displacement,
                amplitude: r.amplitude,
                ratio: r.ratio,
                homothety: r.homothety,
                nondegenerate: r.nondegenerate,
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Alpha { common, other, n } => {
            let table = load(&common.table)?;
            let other = load(&other)?;
            let alpha = alpha_between(&table, &other, n).map_err(usage)?;
            let report = AlphaReport {
                table_id: table.id(),
                other_table_id: other.id(),
                n,
                alpha,
            };
            write_output(&common.out, &json(&report)?)
        }
        Command::Smooth { common, radius, corners } => {
            let table = load(&common.table)?;
            let smoothed = table.smooth_corners(radius, corners.as_deref()).map_err(domain)?;
            let spec = smoothed
                .source()
                .ok_or_else(|| domain("only polygon definitions can be smoothed into a file"))?;
            write_output(&common.out, &(spec.to_json() + "\n"))
        }
        Command::Approx { common, tol, report } => {
            let table = load(&common.table)?;
            let approx = table
                .approximate_by_rational_polygon(tol, &ApproxOptions::default())
                .map_err(domain)?;
            let spec = approx.table.source().expect("rational polygons keep their definition");
            write_output(&common.out, &(spec.to_json() + "\n"))?;
            if report.is_some() {
                let summary = ApproxReport {
                    table_id: table.id(),
                    polygon_id: approx.table.id(),
                    tol,
                    vertices: approx.vertices,
                    denominator: approx.denominator,
                    alpha: approx.alpha,
                    max_turn_discrepancy: approx.max_turn_discrepancy,
                };
                write_output(&report, &json(&summary)?)?;
            }
            Ok(())
        }
        Command::Render { common, report } => {
            let table = load(&common.table)?;
            let text = std::fs::read_to_string(&report)
                .map_err(|e| usage(format!("cannot read {}: {e}", report.display())))?;
            let svg = render_svg(&text, &table).map_err(domain)?;
            write_output(&common.out, &svg)
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status. Errors go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(parse_grid("10x10"), Ok((10, 10)));
        assert_eq!(parse_grid("3X4"), Ok((3, 4)));
        assert!(parse_grid("0x4").is_err());
        assert!(parse_grid("10").is_err());
    }

    #[test]
    fn svg_for_square_vertical_orbit() {
        let sq = Table::unit_square();
        let report = format!(r#"{{"table_id": "{}", "params": [0.125, 0.625]}}"#, sq.id());
        let svg = render_svg(&report, &sq).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert_eq!(svg.matches(" Z\"").count(), 1);
        assert_eq!(svg.matches("<line").count(), 2);
    }

    #[test]
    fn svg_for_circle_triangle() {
        let c = Table::circle();
        let o = find_periodic_orbit(&c, 3, &BounceConfiguration::new(vec![0.0, 1.0 / 3.0, 2.0 / 3.0])).unwrap();
        let report = to_json(&OrbitsReport {
            table_id: c.id(),
            tau_max: 3,
            seeds: 1,
            rng: 0,
            orbits: vec![OrbitRecord::new(&c, &o)],
        })
        .unwrap();
        let svg = render_svg(&report, &c).unwrap();
        assert_eq!(svg.matches("<line").count(), 3);
        assert_eq!(svg, render_svg(&report, &c).unwrap());
    }

    #[test]
    fn svg_rejects_reports_of_other_tables() {
        let sq = Table::unit_square();
        let report = format!(r#"{{"table_id": "{}", "params": [0.1, 0.6]}}"#, Table::circle().id());
        assert!(matches!(
            render_svg(&report, &sq),
            Err(RenderError::MismatchedReport { .. })
        ));
        assert!(matches!(render_svg("[]", &sq), Err(RenderError::Malformed(_))));
    }
}
