use nalgebra::{DMatrix, DVector};

use crate::geom::Vec2;

/// Closed C² cubic spline through control points, chord-length knots.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    points: Vec<Vec2>,
    second: Vec<Vec2>,
}

impl PeriodicSpline {
    /// Returns `None` when two consecutive control points coincide.
    pub fn through(points: &[Vec2]) -> Option<Self> {
        let m = points.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(0.0);
        for i in 0..m {
            let h = (points[(i + 1) % m] - points[i]).norm();
            if h <= 0.0 {
                return None;
            }
            knots.push(knots[i] + h);
        }
        let h = |i: usize| knots[i + 1] - knots[i];
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rx = DVector::<f64>::zeros(m);
        let mut ry = DVector::<f64>::zeros(m);
        for i in 0..m {
            let prev = (i + m - 1) % m;
            let next = (i + 1) % m;
            let (hp, hi) = (h(prev), h(i));
            a[(i, prev)] += hp;
            a[(i, i)] += 2.0 * (hp + hi);
            a[(i, next)] += hi;
            let rhs = (points[next] - points[i]) / hi - (points[i] - points[prev]) / hp;
            rx[i] = 6.0 * rhs.x;
            ry[i] = 6.0 * rhs.y;
        }
        let lu = a.lu();
        let mx = lu.solve(&rx)?;
        let my = lu.solve(&ry)?;
        let second = (0..m).map(|i| Vec2::new(mx[i], my[i])).collect();
        Some(Self {
            knots,
            points: points.to_vec(),
            second,
        })
    }

    pub fn period(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots[..self.points.len()]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            knots: self.knots.clone(),
            points: self.points.iter().map(|p| p * k).collect(),
            second: self.second.iter().map(|p| p * k).collect(),
        }
    }

    /// Point and first three derivatives in the spline parameter.
    pub fn jet(&self, u: f64) -> [Vec2; 4] {
        let period = self.period();
        let u = u.rem_euclid(period);
        let m = self.points.len();
        let i = match self.knots.binary_search_by(|k| k.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(m - 1),
            Err(i) => (i - 1).min(m - 1),
        };
        let (u0, u1) = (self.knots[i], self.knots[i + 1]);
        let h = u1 - u0;
        let (p0, p1) = (self.points[i], self.points[(i + 1) % m]);
        let (m0, m1) = (self.second[i], self.second[(i + 1) % m]);
        let a = u1 - u;
        let b = u - u0;
        let c0 = p0 / h - m0 * h / 6.0;
        let c1 = p1 / h - m1 * h / 6.0;
        let p = m0 * (a * a * a) / (6.0 * h) + m1 * (b * b * b) / (6.0 * h) + c0 * a + c1 * b;
        let d1 = -m0 * (a * a) / (2.0 * h) + m1 * (b * b) / (2.0 * h) - c0 + c1;
        let d2 = m0 * a / h + m1 * b / h;
        let d3 = (m1 - m0) / h;
        [p, d1, d2, d3]
    }
}
