//! Circle and 2-sphere maps, stereographic charts, and the splitting of a
//! homeomorphism into pieces supported in chart disks.

mod chart;
mod decompose;
mod demo;
mod map;

use thiserror::Error;

pub use chart::{turns_of, Chart, SpherePoint};
pub use decompose::{
    anchor_arc, anchor_chart, anchor_support_radius, arc_chart, arc_support_radius, decompose_circle,
    decompose_sphere_rotation, twist_charts, twist_support_radius, CircleSplit, ANCHOR_COUNT, ANCHOR_LEN, ARC_I2,
};
pub use demo::{demo_k_bounds, normalizer, sphere_distortion_demo, DemoOptions, DemoReport, DemoRow, NORMALIZER};
pub use map::{transport, Ramp, SphereMap, POWER_CAP};

use crate::geomaps::MapError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("expected a point of R^2 or R^3, got dimension {0}")]
    Dimension(usize),
    #[error("point is not on the unit sphere (norm {0})")]
    NotUnit(f64),
    #[error("power {0} exceeds the composition cap")]
    PowerCap(i64),
    #[error("support radius {support} escapes chart disk of radius {disk}")]
    SupportEscapesChart { support: f64, disk: f64 },
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Word(#[from] crate::words::WordError),
    #[error("witness: {0}")]
    Witness(String),
}
