//! Exactly-invertible homeomorphisms of `R^N` as expression trees.
//!
//! Every primitive is piecewise linear (or Lipschitz with a contractive
//! displacement) so forward and backward evaluation are both available
//! without approximation beyond floating point. Each expression carries a
//! support radius `R` with `m(x) = x` bitwise for `|x| >= R`.

mod map;
mod metric;
mod profile;
mod region;
mod sample;

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use map::{AffineMap, AxisPush, ChartPatch, LocalTranslation, MapExpr, Node, RadialMap};
pub use metric::{c0_distance, check_round_trip, RoundTripReport};
pub use profile::Profile;
pub use region::{Ball, RegionDescriptor, UnionPart};
pub use sample::{random_in_ball, random_on_sphere, seeded_rng, Sampler};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in input point")]
    NonFinite,
    #[error("fixed-point inversion did not converge after {iterations} iterations (step {step:e})")]
    NoConvergence { iterations: usize, step: f64 },
    #[error("point claimed by regions {first} and {second}")]
    RegionOverlap { first: usize, second: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact power not available for {0} nodes")]
    UnsupportedPower(&'static str),
    #[error("sampler produced no points")]
    EmptySampler,
    #[error("sphere map: {0}")]
    Sphere(String),
    #[error("json: {0}")]
    Json(String),
}

/// A point of `R^N` with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, MapError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MapError::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = MapError;
    fn try_from(v: Vec<f64>) -> Result<Self, MapError> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Anything that can be evaluated forward and backward on `f64` points.
///
/// Implemented by [`MapExpr`] and by the numerically inverted factors of the
/// foliation splitting, so metrics and checks work uniformly on both.
pub trait PointMap {
    fn dim(&self) -> usize;
    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, MapError>;
    fn unmap_point(&self, y: &[f64]) -> Result<Vec<f64>, MapError>;
}
