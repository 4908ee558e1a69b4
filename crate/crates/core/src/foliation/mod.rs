//! Coordinate-wise decomposition of near-identity maps of a cube, and slab
//! fragmentation built on top of it.
//!
//! A map `f` equal to the identity near the faces of `(-a, a)^N` is written
//! as `φ_N ∘ … ∘ φ_1`, where `φ_k` changes only coordinate `k` and so
//! preserves the lines parallel to that axis.

mod factor;
mod fragment;
mod solve;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use factor::{
    foliation_decompose, leaf_preservation_check, slope_margin, Decomposition, DecompositionReport, FactorSummary,
    FoliationFactor, LeafReport,
};
pub use fragment::{even_slabs, fragment_product_error, fragmentation_c0, Fragment, Slab};
pub use solve::{solve_monotone, Root, SolveFailure};

use crate::geomaps::{seeded_rng, MapError, MapExpr};

/// Slice slopes below this count as "too far from the identity".
pub const SLOPE_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoliationError {
    #[error("cannot decompose in dimension {0}")]
    Dimension(usize),
    #[error("map moves the cube-face point {sample:?}")]
    SupportEscapesCube { sample: Vec<f64> },
    #[error("axis {axis}: slice slope {slope} below {threshold} near {sample:?}")]
    Monotonicity {
        axis: usize,
        sample: Vec<f64>,
        slope: f64,
        threshold: f64,
    },
    #[error("invalid slab cover: {0}")]
    InvalidCover(String),
    #[error("cover too fine: overlap {overlap} on axis {axis} cannot absorb displacement {displacement}")]
    CoverTooFine {
        axis: usize,
        overlap: f64,
        displacement: f64,
    },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationOptions {
    pub half_width: f64,
    /// Points per axis of the verification grid.
    pub grid: usize,
    /// Reconstruction tolerance.
    pub tol: f64,
    /// Residual bound for every 1-D solve.
    pub solve_tol: f64,
    pub invariant_tol: f64,
    /// Grid points used for the partial-projection identities.
    pub invariant_samples: usize,
    pub seed: u64,
}

impl Default for FoliationOptions {
    fn default() -> Self {
        FoliationOptions {
            half_width: 1.0,
            grid: 17,
            tol: 1e-6,
            solve_tol: 1e-10,
            invariant_tol: 1e-8,
            invariant_samples: 1000,
            seed: 0,
        }
    }
}

/// Random near-identity map of `(-1, 1)^N`: `N + 1` bumps at random centres,
/// each pushing along a coordinate axis (random sign) by `amplitude`. Large
/// amplitudes are reached by stacking steps of at most 0.1, so each step
/// stays invertible while the slices get steeper.
pub fn perturbation(dim: usize, amplitude: f64, seed: u64) -> Result<MapExpr, MapError> {
    let mut rng = seeded_rng(seed);
    let steps = ((amplitude / 0.1).ceil() as usize).max(1);
    let mut maps = Vec::new();
    for b in 0..=dim {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.4..0.4)).collect();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut shift = vec![0.0; dim];
        shift[b % dim] = sign * amplitude / steps as f64;
        for _ in 0..steps {
            maps.push(MapExpr::translation(center.clone(), shift.clone(), 0.3, 0.45)?);
        }
    }
    MapExpr::compose(dim, &maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomaps::{PointMap, Sampler};

    fn quick() -> FoliationOptions {
        FoliationOptions {
            grid: 9,
            invariant_samples: 100,
            ..FoliationOptions::default()
        }
    }

    #[test]
    fn identity_factors_are_identity() {
        let dec = foliation_decompose(&MapExpr::identity(2), &quick()).unwrap();
        for x in Sampler::grid(9, 1.0).points(2) {
            for f in &dec.factors {
                assert_eq!(f.map_point(&x).unwrap(), x);
            }
        }
        assert!(dec.report.passed);
        assert_eq!(dec.report.sup_error, 0.0);
    }

    #[test]
    fn one_axis_map_is_its_own_first_factor() {
        let f = MapExpr::translation(vec![0.1, 0.0], vec![0.1, 0.0], 0.2, 0.6).unwrap();
        let dec = foliation_decompose(&f, &quick()).unwrap();
        for x in Sampler::grid(9, 1.0).points(2) {
            assert_eq!(dec.factors[0].map_point(&x).unwrap(), f.apply(&x).unwrap());
            assert_eq!(dec.factors[1].map_point(&x).unwrap(), x);
        }
    }

    #[test]
    fn support_must_stay_in_cube() {
        let f = MapExpr::translation(vec![0.9, 0.0], vec![0.05, 0.0], 0.1, 0.4).unwrap();
        assert!(matches!(
            foliation_decompose(&f, &quick()),
            Err(FoliationError::SupportEscapesCube { .. })
        ));
    }

    #[test]
    fn steep_perturbation_is_rejected() {
        let f = perturbation(2, 0.5, 1).unwrap();
        match foliation_decompose(&f, &quick()) {
            Err(FoliationError::Monotonicity { slope, .. }) => assert!(slope < SLOPE_THRESHOLD),
            other => panic!("expected a monotonicity failure, got {other:?}"),
        }
    }
}
