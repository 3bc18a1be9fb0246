//! Boundary pieces: straight segments, circular arcs, and arc-length
//! reparametrized curves (periodic splines, ellipses, displaced stretches).

use std::f64::consts::TAU;
use std::sync::Arc;

use super::arclength::ArcLength;
use super::curvature_bump::CurvatureBump;
use super::spline::PeriodicSpline;
use crate::geom::{cross, left_normal, unit_from_angle, Vec2};

/// Point, unit tangent and signed curvature at one boundary parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub point: Vec2,
    pub tangent: Vec2,
    pub curvature: f64,
}

impl Frame {
    /// Inward unit normal (interior lies on the left).
    pub fn inward_normal(&self) -> Vec2 {
        left_normal(&self.tangent)
    }

    pub fn outward_normal(&self) -> Vec2 {
        -left_normal(&self.tangent)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

/// Arc of the circle `center + radius (cos phi, sin phi)`, starting at
/// `start_angle` and sweeping `sweep` radians (negative means clockwise).
#[derive(Clone, Debug)]
pub(crate) struct CircularArc {
    pub center: Vec2,
    pub radius: f64,
    pub start_angle: f64,
    pub sweep: f64,
}

impl CircularArc {
    fn angle_at(&self, s: f64) -> f64 {
        self.start_angle + self.sweep.signum() * s / self.radius
    }
}

/// Smooth parametric source curve with derivatives in its own parameter.
#[derive(Clone, Debug)]
pub(crate) enum Generator {
    Spline(Arc<PeriodicSpline>),
    Ellipse { a: f64, b: f64 },
    Displaced(Arc<Displacement>),
}

/// A normal displacement of a stretch of boundary. The parameter is the arc
/// length along the undisplaced base, with the bump center at `half_width`.
#[derive(Clone, Debug)]
pub(crate) struct Displacement {
    pub base: Vec<Piece>,
    pub offsets: Vec<f64>,
    pub bump: CurvatureBump,
}

pub(crate) struct Jet {
    pub p: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    pub d3: Option<Vec2>,
}

impl Displacement {
    pub(crate) fn new(base: Vec<Piece>, bump: CurvatureBump) -> Self {
        let mut offsets = vec![0.0];
        for p in &base {
            offsets.push(offsets.last().unwrap() + p.length());
        }
        Self { base, offsets, bump }
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let k = match self.offsets.binary_search_by(|o| o.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(self.base.len() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.base.len() - 1),
        };
        (k, u - self.offsets[k])
    }

    pub(crate) fn point(&self, u: f64) -> Vec2 {
        self.jet(u).p
    }

    fn jet(&self, u: f64) -> Jet {
        let (k, local) = self.locate(u);
        let piece = &self.base[k];
        let f = piece.frame(local);
        let dk = piece.curvature_derivative(local).unwrap_or(0.0);
        let [h0, h1, h2] = self.bump.displacement(u - self.bump.half_width);
        let t = f.tangent;
        let n = left_normal(&t);
        let kappa = f.curvature;
        Jet {
            p: f.point + h0 * n,
            d1: (1.0 - h0 * kappa) * t + h1 * n,
            d2: (-2.0 * h1 * kappa - h0 * dk) * t + ((1.0 - h0 * kappa) * kappa + h2) * n,
            d3: None,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let mut b = self.offsets.clone();
        let c = self.bump.half_width;
        if !b.iter().any(|x| (x - c).abs() < 1e-15) {
            b.push(c);
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        }
        b
    }

    fn scaled(&self, k: f64) -> Self {
        Self::new(
            self.base.iter().map(|p| p.scaled(k)).collect(),
            self.bump.scaled(k),
        )
    }
}

impl Generator {
    fn jet(&self, u: f64) -> Jet {
        match self {
            Generator::Spline(sp) => {
                let [p, d1, d2, d3] = sp.jet(u);
                Jet { p, d1, d2, d3: Some(d3) }
            }
            Generator::Ellipse { a, b } => {
                let (s, c) = u.sin_cos();
                Jet {
                    p: Vec2::new(a * c, b * s),
                    d1: Vec2::new(-a * s, b * c),
                    d2: Vec2::new(-a * c, -b * s),
                    d3: Some(Vec2::new(a * s, -b * c)),
                }
            }
            Generator::Displaced(d) => d.jet(u),
        }
    }

    fn speed(&self, u: f64) -> f64 {
        self.jet(u).d1.norm()
    }

    fn breaks(&self, u0: f64, u1: f64) -> Vec<f64> {
        let mut out = vec![u0];
        match self {
            Generator::Spline(sp) => {
                let period = sp.period();
                let base = (u0 / period).floor() * period;
                for turn in 0..3 {
                    for k in sp.knots() {
                        let u = base + turn as f64 * period + k;
                        if u > u0 + 1e-12 && u < u1 - 1e-12 {
                            out.push(u);
                        }
                    }
                }
            }
            Generator::Ellipse { .. } => {
                let quarter = TAU / 4.0;
                let mut u = (u0 / quarter).floor() * quarter;
                while u < u1 {
                    if u > u0 + 1e-12 && u < u1 - 1e-12 {
                        out.push(u);
                    }
                    u += quarter;
                }
            }
            Generator::Displaced(d) => {
                for b in d.breaks() {
                    if b > u0 + 1e-15 && b < u1 - 1e-15 {
                        out.push(b);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(u1);
        out
    }

    fn scaled(&self, k: f64) -> Self {
        match self {
            Generator::Spline(sp) => Generator::Spline(Arc::new(sp.scaled(k))),
            Generator::Ellipse { a, b } => Generator::Ellipse { a: a * k, b: b * k },
            Generator::Displaced(d) => Generator::Displaced(Arc::new(d.scaled(k))),
        }
    }

    /// Maps a parameter of the unscaled generator to the scaled one.
    fn scaled_param(&self, u: f64, k: f64) -> f64 {
        match self {
            Generator::Displaced(_) => u * k,
            _ => u,
        }
    }
}

/// A smooth curve restricted to `[u0, u1]` and reparametrized by arc length.
#[derive(Clone, Debug)]
pub(crate) struct CurvePiece {
    pub gen: Generator,
    pub u0: f64,
    pub u1: f64,
    arc: ArcLength,
    /// Arc-length samples used to bracket ray crossings and build polylines.
    grid: Vec<f64>,
}

impl CurvePiece {
    pub(crate) fn new(gen: Generator, u0: f64, u1: f64) -> Self {
        let breaks = gen.breaks(u0, u1);
        let arc = {
            let speed = |u: f64| gen.speed(u);
            ArcLength::build(&speed, &breaks, 4)
        };
        let mut piece = Self {
            gen,
            u0,
            u1,
            arc,
            grid: Vec::new(),
        };
        piece.grid = piece.build_grid();
        piece
    }

    fn build_grid(&self) -> Vec<f64> {
        let len = self.length();
        let probe = 64;
        let mut kmax: f64 = 0.0;
        for i in 0..=probe {
            kmax = kmax.max(self.frame(len * i as f64 / probe as f64).curvature.abs());
        }
        let n = 16usize
            .max((len * 1024.0).ceil() as usize)
            .max((len * kmax / 0.05).ceil() as usize)
            .min(1 << 16);
        (0..=n).map(|i| len * i as f64 / n as f64).collect()
    }

    pub(crate) fn length(&self) -> f64 {
        self.arc.total()
    }

    pub(crate) fn u_of_s(&self, s: f64) -> f64 {
        let speed = |u: f64| self.gen.speed(u);
        self.arc.u_of_s(&speed, s)
    }

    pub(crate) fn s_of_u(&self, u: f64) -> f64 {
        let speed = |u: f64| self.gen.speed(u);
        self.arc.s_of_u(&speed, u)
    }

    fn jet_at(&self, s: f64) -> Jet {
        self.gen.jet(self.u_of_s(s))
    }

    pub(crate) fn frame(&self, s: f64) -> Frame {
        let j = self.jet_at(s);
        let sp = j.d1.norm();
        Frame {
            point: j.p,
            tangent: j.d1 / sp,
            curvature: cross(&j.d1, &j.d2) / (sp * sp * sp),
        }
    }

    fn curvature_derivative(&self, s: f64) -> Option<f64> {
        let j = self.jet_at(s);
        let d3 = j.d3?;
        let sp = j.d1.norm();
        let c12 = cross(&j.d1, &j.d2);
        let dk_du = cross(&j.d1, &d3) / sp.powi(3) - 3.0 * c12 * j.d1.dot(&j.d2) / sp.powi(5);
        Some(dk_du / sp)
    }

    fn sub(&self, a: f64, b: f64) -> Self {
        let ua = if a <= 0.0 { self.u0 } else { self.u_of_s(a) };
        let ub = if b >= self.length() { self.u1 } else { self.u_of_s(b) };
        Self::new(self.gen.clone(), ua, ub)
    }

    fn scaled(&self, k: f64) -> Self {
        Self::new(
            self.gen.scaled(k),
            self.gen.scaled_param(self.u0, k),
            self.gen.scaled_param(self.u1, k),
        )
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Piece {
    Segment(Segment),
    Arc(CircularArc),
    Curve(CurvePiece),
}

impl Piece {
    pub(crate) fn segment(a: Vec2, b: Vec2) -> Self {
        Piece::Segment(Segment { a, b })
    }

    pub(crate) fn arc(center: Vec2, radius: f64, start_angle: f64, sweep: f64) -> Self {
        Piece::Arc(CircularArc {
            center,
            radius,
            start_angle,
            sweep,
        })
    }

    pub(crate) fn length(&self) -> f64 {
        match self {
            Piece::Segment(s) => (s.b - s.a).norm(),
            Piece::Arc(a) => a.radius * a.sweep.abs(),
            Piece::Curve(c) => c.length(),
        }
    }

    pub(crate) fn is_displaced(&self) -> bool {
        matches!(self, Piece::Curve(CurvePiece { gen: Generator::Displaced(_), .. }))
    }

    pub(crate) fn frame(&self, s: f64) -> Frame {
        match self {
            Piece::Segment(seg) => {
                let d = seg.b - seg.a;
                let t = d / d.norm();
                Frame {
                    point: seg.a + s * t,
                    tangent: t,
                    curvature: 0.0,
                }
            }
            Piece::Arc(arc) => {
                let phi = arc.angle_at(s);
                let radial = unit_from_angle(phi);
                let sg = arc.sweep.signum();
                Frame {
                    point: arc.center + arc.radius * radial,
                    tangent: sg * left_normal(&radial),
                    curvature: sg / arc.radius,
                }
            }
            Piece::Curve(c) => c.frame(s),
        }
    }

    pub(crate) fn point(&self, s: f64) -> Vec2 {
        self.frame(s).point
    }

    /// Arc-length derivative of the curvature, `None` where not available.
    pub(crate) fn curvature_derivative(&self, s: f64) -> Option<f64> {
        match self {
            Piece::Segment(_) | Piece::Arc(_) => Some(0.0),
            Piece::Curve(c) => c.curvature_derivative(s),
        }
    }

    pub(crate) fn start(&self) -> Vec2 {
        match self {
            Piece::Segment(s) => s.a,
            _ => self.point(0.0),
        }
    }

    pub(crate) fn end(&self) -> Vec2 {
        match self {
            Piece::Segment(s) => s.b,
            _ => self.point(self.length()),
        }
    }

    pub(crate) fn sub(&self, a: f64, b: f64) -> Piece {
        match self {
            Piece::Segment(seg) => {
                let end = if b >= self.length() { seg.b } else { self.point(b) };
                let start = if a <= 0.0 { seg.a } else { self.point(a) };
                Piece::segment(start, end)
            }
            Piece::Arc(arc) => Piece::Arc(CircularArc {
                center: arc.center,
                radius: arc.radius,
                start_angle: arc.angle_at(a),
                sweep: arc.sweep.signum() * (b - a) / arc.radius,
            }),
            Piece::Curve(c) => Piece::Curve(c.sub(a, b)),
        }
    }

    pub(crate) fn scaled(&self, k: f64) -> Piece {
        match self {
            Piece::Segment(s) => Piece::segment(s.a * k, s.b * k),
            Piece::Arc(a) => Piece::Arc(CircularArc {
                center: a.center * k,
                radius: a.radius * k,
                start_angle: a.start_angle,
                sweep: a.sweep,
            }),
            Piece::Curve(c) => Piece::Curve(c.scaled(k)),
        }
    }

    /// Closed polyline approximation: includes the start, excludes the end.
    pub(crate) fn polyline(&self) -> Vec<Vec2> {
        match self {
            Piece::Segment(s) => vec![s.a],
            Piece::Arc(a) => {
                let n = ((a.sweep.abs() / 0.05).ceil() as usize).max(2);
                let len = self.length();
                (0..n).map(|i| self.point(len * i as f64 / n as f64)).collect()
            }
            Piece::Curve(c) => c.grid[..c.grid.len() - 1]
                .iter()
                .map(|&s| c.frame(s).point)
                .collect(),
        }
    }

    /// Ray crossings `(t, s_local)` with `t > t_min`. `exclude` is a local
    /// parameter whose trivial root (the ray origin) is skipped.
    pub(crate) fn ray_hits(
        &self,
        origin: &Vec2,
        dir: &Vec2,
        t_min: f64,
        exclude: Option<f64>,
    ) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        match self {
            Piece::Segment(seg) => {
                let len = self.length();
                let e = (seg.b - seg.a) / len;
                let den = cross(dir, &e);
                if den.abs() < 1e-15 {
                    return out;
                }
                let sigma = cross(dir, &(origin - seg.a)) / den;
                let tol = 1e-12 * len.max(1e-300);
                if sigma >= -tol && sigma <= len + tol {
                    let sigma = sigma.clamp(0.0, len);
                    let t = (seg.a + sigma * e - origin).dot(dir);
                    if t > t_min {
                        out.push((t, sigma));
                    }
                }
            }
            Piece::Arc(arc) => {
                let oc = origin - arc.center;
                let bq = dir.dot(&oc);
                let cq = oc.norm_squared() - arc.radius * arc.radius;
                let disc = bq * bq - cq;
                if disc < 0.0 {
                    return out;
                }
                let sq = disc.sqrt();
                // Stable pair of roots.
                let q = -bq - bq.signum() * sq;
                let roots = if q == 0.0 { [-bq, -bq] } else { [q, cq / q] };
                let full = arc.sweep.abs() >= TAU - 1e-15;
                let ang_tol = 1e-12;
                for t in roots {
                    if t <= t_min {
                        continue;
                    }
                    let p = origin + t * dir;
                    let phi = (p.y - arc.center.y).atan2(p.x - arc.center.x);
                    let mut alpha = (arc.sweep.signum() * (phi - arc.start_angle)).rem_euclid(TAU);
                    if full {
                        out.push((t, arc.radius * alpha));
                        continue;
                    }
                    if alpha > TAU - ang_tol {
                        alpha = 0.0;
                    }
                    if alpha <= arc.sweep.abs() + ang_tol {
                        out.push((t, arc.radius * alpha.min(arc.sweep.abs())));
                    }
                }
                if out.len() == 2 && (out[0].0 - out[1].0).abs() == 0.0 {
                    out.pop();
                }
            }
            Piece::Curve(c) => c.ray_hits(origin, dir, t_min, exclude, &mut out),
        }
        out
    }
}

impl CurvePiece {
    fn ray_hits(
        &self,
        origin: &Vec2,
        dir: &Vec2,
        t_min: f64,
        exclude: Option<f64>,
        out: &mut Vec<(f64, f64)>,
    ) {
        let f = |s: f64| {
            let fr = self.frame(s);
            (cross(dir, &(fr.point - origin)), cross(dir, &fr.tangent), fr.point)
        };
        let gap = 1e-9;
        let mut intervals = Vec::with_capacity(self.grid.len());
        for w in self.grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            match exclude {
                Some(x) if x >= a - gap && x <= b + gap => {
                    if x - gap > a {
                        intervals.push((a, x - gap));
                    }
                    if x + gap < b {
                        intervals.push((x + gap, b));
                    }
                }
                _ => intervals.push((a, b)),
            }
        }
        let push = |s: f64, p: Vec2, out: &mut Vec<(f64, f64)>| {
            let t = (p - origin).dot(dir);
            if t > t_min && !out.iter().any(|&(_, so)| (so - s).abs() < 1e-13) {
                out.push((t, s));
            }
        };
        // Crossings within rounding of a grid point would otherwise slip
        // between two intervals without a sign change.
        let on_line = 1e-14;
        let last = intervals.len().saturating_sub(1);
        for (i, &(a, b)) in intervals.iter().enumerate() {
            let (fa, ga, pa) = f(a);
            let (fb, gb, pb) = f(b);
            if i == last && fb.abs() <= on_line {
                push(b, pb, out);
            }
            if fa.abs() <= on_line {
                push(a, pa, out);
                continue;
            }
            if fa * fb < 0.0 {
                let s = self.bracket_root(&f, a, b, fa);
                push(s, self.frame(s).point, out);
            } else if ga * gb < 0.0 {
                // f has an interior extremum: look for a pair of close crossings.
                let (mut lo, mut hi) = (a, b);
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    let (_, gm, _) = f(m);
                    if gm * ga > 0.0 {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let m = 0.5 * (lo + hi);
                let (fm, _, _) = f(m);
                if fm * fa < 0.0 {
                    let s1 = self.bracket_root(&f, a, m, fa);
                    let s2 = self.bracket_root(&f, m, b, fm);
                    push(s1, self.frame(s1).point, out);
                    push(s2, self.frame(s2).point, out);
                }
            }
        }
    }

    fn bracket_root<F: Fn(f64) -> (f64, f64, Vec2)>(&self, f: &F, a: f64, b: f64, fa: f64) -> f64 {
        let (mut lo, mut hi) = (a, b);
        let mut s = 0.5 * (a + b);
        for _ in 0..100 {
            let (fs, gs, _) = f(s);
            if fs.abs() < 1e-17 {
                return s;
            }
            if fs * fa > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let newton = s - fs / gs;
            s = if gs != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) < 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        s
    }
}
