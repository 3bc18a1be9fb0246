use serde::{Deserialize, Serialize};

/// Shape of a normal displacement supported on `|u| <= half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    /// `(1 - (u/rho)^2)^3`: moves the center point by the full amplitude.
    #[default]
    Plateau,
    /// `(u/rho)^2 / 2 * (1 - (u/rho)^2)^3`: keeps the center point and its
    /// tangent fixed and adds `amplitude / rho^2` to the curvature there.
    Pinned,
}

/// Local normal displacement of the boundary around `center`.
///
/// Positive amplitude pushes the boundary toward the interior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub profile: BumpProfile,
}

impl CurvatureBump {
    pub fn plateau(center: f64, half_width: f64, amplitude: f64) -> Self {
        Self {
            center,
            half_width,
            amplitude,
            profile: BumpProfile::Plateau,
        }
    }

    /// Bump that changes the curvature at `center` by exactly `delta`
    /// without moving the point or its tangent.
    pub fn curvature_offset(center: f64, half_width: f64, delta: f64) -> Self {
        Self {
            center,
            half_width,
            amplitude: delta * half_width * half_width,
            profile: BumpProfile::Pinned,
        }
    }

    /// Displacement and its first two derivatives at offset `u` from the center.
    pub fn displacement(&self, u: f64) -> [f64; 3] {
        let rho = self.half_width;
        let x = u / rho;
        if x.abs() >= 1.0 {
            return [0.0; 3];
        }
        let w = 1.0 - x * x;
        // g(x) = w^3, derivatives in x
        let g = [w * w * w, -6.0 * x * w * w, -6.0 * w * w + 24.0 * x * x * w];
        let g = match self.profile {
            BumpProfile::Plateau => g,
            BumpProfile::Pinned => {
                let q = [0.5 * x * x, x, 1.0];
                [
                    q[0] * g[0],
                    q[1] * g[0] + q[0] * g[1],
                    q[2] * g[0] + 2.0 * q[1] * g[1] + q[0] * g[2],
                ]
            }
        };
        let a = self.amplitude;
        [a * g[0], a * g[1] / rho, a * g[2] / (rho * rho)]
    }

    pub(crate) fn scaled(&self, k: f64) -> Self {
        Self {
            center: self.center * k,
            half_width: self.half_width * k,
            amplitude: self.amplitude * k,
            profile: self.profile,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(b: &CurvatureBump) {
        let h = 1e-5;
        for i in 1..40 {
            let u = -b.half_width + 2.0 * b.half_width * i as f64 / 40.0;
            let [_, d1, d2] = b.displacement(u);
            let fd1 = (b.displacement(u + h)[0] - b.displacement(u - h)[0]) / (2.0 * h);
            let fd2 = (b.displacement(u + h)[1] - b.displacement(u - h)[1]) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "{d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-5 * (1.0 + d2.abs()), "{d2} {fd2}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        fd_check(&CurvatureBump::plateau(0.0, 0.1, 0.01));
        fd_check(&CurvatureBump::curvature_offset(0.0, 0.1, 3.0));
    }

    #[test]
    fn vanishes_to_second_order_at_edges() {
        for b in [
            CurvatureBump::plateau(0.0, 0.05, 1e-3),
            CurvatureBump::curvature_offset(0.0, 0.05, 2.0),
        ] {
            for u in [-0.05, 0.05] {
                let d = b.displacement(u * (1.0 - 1e-9));
                assert!(d[0].abs() < 1e-20 && d[1].abs() < 1e-14 && d[2].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pinned_profile_sets_second_derivative() {
        let b = CurvatureBump::curvature_offset(0.0, 0.05, 2.5);
        let d = b.displacement(0.0);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 0.0);
        assert!((d[2] - 2.5).abs() < 1e-12);
    }
}
