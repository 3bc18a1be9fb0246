//! Small planar helpers shared by every module.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

#[inline]
pub fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// z-component of the 3D cross product.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counterclockwise rotation by a quarter turn.
#[inline]
pub fn left_normal(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Signed angle taking `a` to `b`, in (-pi, pi].
#[inline]
pub fn signed_angle(a: &Vec2, b: &Vec2) -> f64 {
    cross(a, b).atan2(a.dot(b))
}

#[inline]
pub fn unit_from_angle(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// Reflect `v` across the line spanned by the unit vector `dir`.
#[inline]
pub fn reflect_across(v: &Vec2, dir: &Vec2) -> Vec2 {
    2.0 * v.dot(dir) * dir - v
}

/// Wrap a parameter into `[0, period)`.
#[inline]
pub fn wrap(s: f64, period: f64) -> f64 {
    let w = s.rem_euclid(period);
    if w >= period {
        0.0
    } else {
        w
    }
}

/// Distance between two parameters on a circle of circumference `period`.
#[inline]
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: &Vec2, p2: &Vec2, q1: &Vec2, q2: &Vec2) -> bool {
    let d1 = cross(&(q2 - q1), &(p1 - q1));
    let d2 = cross(&(q2 - q1), &(p2 - q1));
    let d3 = cross(&(p2 - p1), &(q1 - p1));
    let d4 = cross(&(p2 - p1), &(q2 - p1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: &Vec2, b: &Vec2, p: &Vec2, d: f64| {
        d == 0.0
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Shoelace signed area of a closed polyline.
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross(&points[i], &points[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}
