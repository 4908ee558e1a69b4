use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::SphereError;

/// Unit vector of `R^2` (circle) or `R^3` (sphere).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(v: Vec<f64>) -> Result<Self, SphereError> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(v.len() == 2 || v.len() == 3) {
            return Err(SphereError::Dimension(v.len()));
        }
        if !n.is_finite() || (n - 1.0).abs() > Self::NORM_TOL {
            return Err(SphereError::NotUnit(n));
        }
        Ok(SpherePoint(v))
    }

    /// Rescales onto the sphere.
    pub fn normalized(v: Vec<f64>) -> Result<Self, SphereError> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(SphereError::NotUnit(n));
        }
        SpherePoint::new(v.into_iter().map(|c| c / n).collect())
    }

    pub fn on_circle(turns: f64) -> Self {
        let a = TAU * turns.rem_euclid(1.0);
        SpherePoint(vec![a.cos(), a.sin()])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = SphereError;
    fn try_from(v: Vec<f64>) -> Result<Self, SphereError> {
        SpherePoint::new(v)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Self {
        p.0
    }
}

/// Angle of a circle point in turns, in `[0, 1)`.
pub fn turns_of(v: &[f64]) -> f64 {
    let t = v[1].atan2(v[0]) / TAU;
    let t = t.rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Stereographic projection from `pole` onto the plane spanned by `basis`.
///
/// The antipode of the pole goes to 0. The chart is meant to be used on the
/// disk `|x| < disk_radius`, the complement of a cap around the pole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub pole: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub disk_radius: f64,
}

impl Chart {
    /// Circle chart projecting from the point at `pole_turns`; coordinates
    /// increase with the angle and equal `tan(π s)` at offset `s` turns from
    /// the antipode.
    pub fn circle(pole_turns: f64, disk_radius: f64) -> Self {
        let p = SpherePoint::on_circle(pole_turns);
        let anti = TAU * (pole_turns + 0.5);
        Chart {
            pole: p.0,
            basis: vec![vec![-anti.sin(), anti.cos()]],
            disk_radius,
        }
    }

    /// Sphere chart projecting from `(0, 0, -1)`; covers everything but a
    /// cap around the south pole.
    pub fn from_south(disk_radius: f64) -> Self {
        Chart {
            pole: vec![0.0, 0.0, -1.0],
            basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            disk_radius,
        }
    }

    /// Sphere chart projecting from `(0, 0, 1)`.
    pub fn from_north(disk_radius: f64) -> Self {
        Chart {
            pole: vec![0.0, 0.0, 1.0],
            basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0]],
            disk_radius,
        }
    }

    pub fn plane_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.pole.len()
    }

    /// `1 - v·p`, zero exactly at the pole.
    pub fn pole_gap(&self, v: &[f64]) -> f64 {
        1.0 - dot(v, &self.pole)
    }

    pub fn forward(&self, v: &[f64]) -> Vec<f64> {
        let den = self.pole_gap(v);
        self.basis.iter().map(|b| dot(v, b) / den).collect()
    }

    pub fn backward(&self, x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let den = r2 + 1.0;
        let mut v: Vec<f64> = self.pole.iter().map(|&p| (r2 - 1.0) * p).collect();
        for (xi, b) in x.iter().zip(&self.basis) {
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj += 2.0 * xi * bj;
            }
        }
        v.into_iter().map(|c| c / den).collect()
    }

    /// Whether `v` lies in the chart's disk.
    pub fn covers(&self, v: &[f64]) -> bool {
        self.pole_gap(v) > 0.0 && crate::scalar::norm_f64(&self.forward(v)) < self.disk_radius
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
