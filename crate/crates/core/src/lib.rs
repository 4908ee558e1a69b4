//! Verified distortion witnesses for homeomorphism groups.
//!
//! Maps are exactly-invertible expression trees ([`geomaps`]); words over a
//! finite alphabet ([`words`]) are evaluated against generator assignments and
//! compared with their targets on sampled points.

pub mod foliation;
pub mod geomaps;
pub mod scalar;
pub mod spheres;
pub mod witness;
pub mod words;
