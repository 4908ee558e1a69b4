use serde::{Deserialize, Serialize};

use super::factor::{foliation_decompose, FoliationFactor};
use super::{FoliationError, FoliationOptions};
use crate::geomaps::{MapError, MapExpr, PointMap};
use crate::scalar::dist_f64;

/// Safety factor on the sampled displacement when padding slab ramps.
const DISPLACEMENT_SLACK: f64 = 1.25;

/// Open slab `lo < x_axis < hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Slab {
    pub fn contains(&self, x: &[f64]) -> bool {
        x[self.axis] > self.lo && x[self.axis] < self.hi
    }
}

/// `count` slabs across `[-a, a]` along `axis`, neighbours overlapping by
/// `overlap`; the end slabs reach past the cube faces.
pub fn even_slabs(axis: usize, count: usize, half_width: f64, overlap: f64) -> Vec<Slab> {
    let w = 2.0 * half_width / count as f64;
    (0..count)
        .map(|i| {
            let lo = if i == 0 {
                -half_width - overlap
            } else {
                -half_width + i as f64 * w - overlap / 2.0
            };
            let hi = if i + 1 == count {
                half_width + overlap
            } else {
                -half_width + (i + 1) as f64 * w + overlap / 2.0
            };
            Slab { axis, lo, hi }
        })
        .collect()
}

/// Fraction of a factor's displacement applied, as a function of the slab
/// coordinate: 1 left of `start`, 0 right of `end`, linear between.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Share {
    Zero,
    One,
    Ramp { start: f64, end: f64 },
}

impl Share {
    fn at(self, t: f64) -> f64 {
        match self {
            Share::Zero => 0.0,
            Share::One => 1.0,
            Share::Ramp { start, end } => {
                if t <= start {
                    1.0
                } else if t >= end {
                    0.0
                } else {
                    (end - t) / (end - start)
                }
            }
        }
    }
}

/// `ψ_{i+1} ∘ ψ_i⁻¹`, where `ψ_i` applies the share `χ_i` of one foliation
/// factor's displacement. Moves only points of its slab.
#[derive(Clone, Debug)]
pub struct Fragment {
    factor: FoliationFactor,
    slab: Slab,
    before: Share,
    after: Share,
    displacement: f64,
    /// Slab coordinates where the two shares differ, widened by `pad`.
    active: (f64, f64),
}

impl Fragment {
    pub fn slab(&self) -> &Slab {
        &self.slab
    }

    /// Axis whose coordinate this piece changes.
    pub fn axis(&self) -> usize {
        self.factor.axis()
    }

    /// True when the underlying factor moves no grid point.
    pub fn is_trivial(&self) -> bool {
        self.displacement == 0.0
    }

    fn is_active(&self, x: &[f64]) -> bool {
        let t = x[self.slab.axis];
        t > self.active.0 && t < self.active.1
    }

    fn partial(&self, share: Share, x: &[f64]) -> Result<Vec<f64>, MapError> {
        let c = share.at(x[self.slab.axis]);
        if c == 0.0 {
            return Ok(x.to_vec());
        }
        let y = self.factor.map_point(x)?;
        if c == 1.0 {
            return Ok(y);
        }
        let k = self.factor.axis();
        let mut z = x.to_vec();
        z[k] = x[k] + c * (y[k] - x[k]);
        Ok(z)
    }

    fn partial_inverse(&self, share: Share, y: &[f64]) -> Result<Vec<f64>, MapError> {
        match share {
            Share::Zero => Ok(y.to_vec()),
            Share::One => self.factor.unmap_point(y),
            Share::Ramp { .. } => {
                if y.iter().any(|c| c.abs() >= self.factor.half_width()) {
                    return Ok(y.to_vec());
                }
                let k = self.factor.axis();
                let t = self
                    .factor
                    .chain()
                    .solve_slice(k, y, |z| Ok(self.partial(share, z)?[k]))?;
                let mut z = y.to_vec();
                z[k] = t;
                Ok(z)
            }
        }
    }
}

impl PointMap for Fragment {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        if !self.is_active(x) {
            return Ok(x.to_vec());
        }
        self.partial(self.after, &self.partial_inverse(self.before, x)?)
    }

    fn unmap_point(&self, y: &[f64]) -> Result<Vec<f64>, MapError> {
        if !self.is_active(y) {
            return Ok(y.to_vec());
        }
        self.partial(self.before, &self.partial_inverse(self.after, y)?)
    }
}

fn validate_cover(cover: &[Slab], dim: usize, a: f64) -> Result<Vec<Slab>, FoliationError> {
    let bad = |m: String| Err(FoliationError::InvalidCover(m));
    let Some(first) = cover.first() else {
        return bad("empty cover".into());
    };
    let axis = first.axis;
    if axis >= dim {
        return bad(format!("axis {axis} out of range for dimension {dim}"));
    }
    let mut slabs = cover.to_vec();
    if slabs.iter().any(|s| s.axis != axis || !(s.lo < s.hi)) {
        return bad("slabs must share one axis and have lo < hi".into());
    }
    slabs.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    if slabs[0].lo > -a || slabs[slabs.len() - 1].hi < a {
        return bad(format!("slabs do not cover [-{a}, {a}]"));
    }
    for w in slabs.windows(2) {
        if !(w[1].lo > w[0].lo && w[1].hi > w[0].hi && w[1].lo < w[0].hi) {
            return bad(format!(
                "slabs {:?} and {:?} are not consecutive overlapping",
                w[0], w[1]
            ));
        }
    }
    Ok(slabs)
}

/// Writes `h` as a product of pieces, each moving only points of one slab:
/// every foliation factor is cut by linear ramps across the slab overlaps.
/// Pieces are listed in application order (first applied first).
///
/// Ramps along the factor's own axis are padded by the displacement, so the
/// overlap must exceed it by a margin depending on the slice slope.
pub fn fragmentation_c0(h: &MapExpr, cover: &[Slab], opts: &FoliationOptions) -> Result<Vec<Fragment>, FoliationError> {
    let slabs = validate_cover(cover, h.dim(), opts.half_width)?;
    let dec = foliation_decompose(h, opts)?;
    let axis = slabs[0].axis;
    let mut pieces = Vec::new();
    for (factor, summary) in dec.factors.iter().zip(&dec.report.factors) {
        let d = DISPLACEMENT_SLACK * summary.displacement;
        let pad = if factor.axis() == axis { d } else { 0.0 };
        let mut shares = vec![Share::Zero];
        for w in slabs.windows(2) {
            let (start, end) = (w[1].lo + pad, w[0].hi - pad);
            let usable = end - start;
            if pad > 0.0 && !(usable > 0.0 && d / usable <= 0.5 * summary.min_slope.min(1.0)) {
                return Err(FoliationError::CoverTooFine {
                    axis,
                    overlap: w[0].hi - w[1].lo,
                    displacement: summary.displacement,
                });
            }
            shares.push(Share::Ramp { start, end });
        }
        shares.push(Share::One);
        for (i, slab) in slabs.iter().enumerate() {
            let from = match shares[i] {
                Share::Ramp { start, .. } => start - pad,
                _ => f64::NEG_INFINITY,
            };
            let to = match shares[i + 1] {
                Share::Ramp { end, .. } => end + pad,
                _ => f64::INFINITY,
            };
            pieces.push(Fragment {
                active: (from, to),
                factor: factor.clone(),
                slab: slab.clone(),
                before: shares[i],
                after: shares[i + 1],
                displacement: summary.displacement,
            });
        }
    }
    Ok(pieces)
}

/// Sup over `points` of the distance between the product of `pieces` and `h`.
pub fn fragment_product_error(h: &MapExpr, pieces: &[Fragment], points: &[Vec<f64>]) -> Result<f64, MapError> {
    let mut sup = 0.0f64;
    for x in points {
        let mut y = x.clone();
        for p in pieces {
            y = p.map_point(&y)?;
        }
        let e = dist_f64(&y, &h.apply(x)?);
        sup = if e.is_finite() { sup.max(e) } else { f64::INFINITY };
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares_telescope() {
        let r = Share::Ramp { start: -0.1, end: 0.1 };
        assert_eq!(r.at(-0.2), 1.0);
        assert_eq!(r.at(0.0), 0.5);
        assert_eq!(r.at(0.3), 0.0);
    }

    #[test]
    fn even_slabs_cover_the_cube() {
        let s = even_slabs(1, 3, 1.0, 0.2);
        assert!(validate_cover(&s, 2, 1.0).is_ok());
        assert!(validate_cover(&s, 1, 1.0).is_err());
        assert!(validate_cover(&even_slabs(0, 3, 1.0, 0.0), 2, 1.0).is_err());
    }
}
