use serde::{Deserialize, Serialize};

use super::sample::Sampler;
use super::{MapError, PointMap};
use crate::scalar::{dist_f64, norm_f64};

/// Sampled `d(f, g) = sup |f - g| + sup |f⁻¹ - g⁻¹|`.
pub fn c0_distance(f: &dyn PointMap, g: &dyn PointMap, sampler: &Sampler) -> Result<f64, MapError> {
    if f.dim() != g.dim() {
        return Err(MapError::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let pts = sampler.points(f.dim());
    if pts.is_empty() {
        return Err(MapError::EmptySampler);
    }
    let (mut fwd, mut bwd) = (0.0f64, 0.0f64);
    for p in &pts {
        fwd = fwd.max(dist_f64(&f.map_point(p)?, &g.map_point(p)?));
        bwd = bwd.max(dist_f64(&f.unmap_point(p)?, &g.unmap_point(p)?));
    }
    Ok(fwd + bwd)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub samples: usize,
    pub max_round_trip: f64,
    /// Sampled points outside the declared support that moved.
    pub support_violations: usize,
}

/// Checks `m⁻¹(m(x)) = x` and `m(x) = x` beyond the support radius.
pub fn check_round_trip(m: &dyn PointMap, support_radius: f64, sampler: &Sampler) -> Result<RoundTripReport, MapError> {
    let pts = sampler.points(m.dim());
    if pts.is_empty() {
        return Err(MapError::EmptySampler);
    }
    let mut worst = 0.0f64;
    let mut violations = 0;
    for p in &pts {
        let y = m.map_point(p)?;
        worst = worst.max(dist_f64(&m.unmap_point(&y)?, p));
        if norm_f64(p) >= support_radius && y != *p {
            violations += 1;
        }
    }
    Ok(RoundTripReport {
        samples: pts.len(),
        max_round_trip: worst,
        support_violations: violations,
    })
}
