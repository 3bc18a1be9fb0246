use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::TableError;
use crate::geom::{unit_from_angle, Vec2};

/// Placement of the first vertex and direction of the first side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub start: [f64; 2],
    pub direction: f64,
}

/// Polygon given by exact interior angles (as fractions of pi) and side
/// lengths. Angle `i` sits at vertex `i`; side `i` joins vertex `i` to `i+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalAngleSpec {
    pub angles: Vec<Ratio<i64>>,
    pub side_lengths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
}

impl RationalAngleSpec {
    pub fn new(angles: Vec<Ratio<i64>>, side_lengths: Vec<f64>) -> Self {
        Self {
            angles,
            side_lengths,
            anchor: None,
        }
    }

    pub fn equal_sides(angles: &[(i64, i64)]) -> Self {
        Self::new(
            angles.iter().map(|&(p, q)| Ratio::new(p, q)).collect(),
            vec![1.0; angles.len()],
        )
    }

    /// Angle-sum check in exact arithmetic.
    pub fn validate_angles(&self) -> Result<(), TableError> {
        let n = self.angles.len();
        if n < 3 {
            return Err(TableError::DegenerateInput(format!("{n} angles")));
        }
        for a in &self.angles {
            if *a <= Ratio::from_integer(0) || *a >= Ratio::from_integer(2) || *a == Ratio::from_integer(1) {
                return Err(TableError::DegenerateInput(format!("interior angle {a} pi")));
            }
        }
        let sum = self
            .angles
            .iter()
            .fold(Ratio::from_integer(0i64), |acc, a| acc + a);
        if sum != Ratio::from_integer(n as i64 - 2) {
            return Err(TableError::NonClosing(format!(
                "interior angles sum to {sum} pi, expected {} pi",
                n - 2
            )));
        }
        Ok(())
    }

    /// Vertices from walking the sides, before normalization.
    pub fn vertices(&self) -> Result<Vec<Vec2>, TableError> {
        self.validate_angles()?;
        let n = self.angles.len();
        if self.side_lengths.len() != n {
            return Err(TableError::DegenerateInput(format!(
                "{} side lengths for {n} angles",
                self.side_lengths.len()
            )));
        }
        if self.side_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(TableError::DegenerateInput("non-positive side length".into()));
        }
        let (start, theta0) = match self.anchor {
            Some(a) => (Vec2::new(a.start[0], a.start[1]), a.direction),
            None => (Vec2::zeros(), 0.0),
        };
        // Cumulative turning kept exact: direction of side k is
        // theta0 + pi * sum_{j=1..k} (1 - angle_j).
        let mut turn = Ratio::from_integer(0i64);
        let mut verts = Vec::with_capacity(n);
        let mut p = start;
        for k in 0..n {
            verts.push(p);
            if k > 0 {
                turn += Ratio::from_integer(1) - self.angles[k];
            }
            let dir = theta0 + std::f64::consts::PI * (*turn.numer() as f64 / *turn.denom() as f64);
            p += self.side_lengths[k] * unit_from_angle(dir);
        }
        let perimeter: f64 = self.side_lengths.iter().sum();
        let gap = (p - start).norm() / perimeter;
        if gap > 1e-10 {
            return Err(TableError::NonClosing(format!(
                "vertex walk misses its start by {gap:e} of the perimeter"
            )));
        }
        Ok(verts)
    }

    pub(crate) fn rotated(&self, first: usize) -> Self {
        let n = self.angles.len();
        Self {
            angles: (0..n).map(|i| self.angles[(i + first) % n]).collect(),
            side_lengths: (0..n).map(|i| self.side_lengths[(i + first) % n]).collect(),
            anchor: None,
        }
    }
}
