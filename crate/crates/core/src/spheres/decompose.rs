use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::chart::{turns_of, Chart, SpherePoint};
use super::map::{Ramp, SphereMap};
use super::SphereError;

/// Large arc `(1/8, 7/8)` in turns; its complement is centered at 0.
pub const ARC_I2: (f64, f64) = (0.125, 0.875);
pub const ANCHOR_COUNT: usize = 20;
pub const ANCHOR_LEN: f64 = 0.05;

pub fn anchor_arc(k: usize) -> (f64, f64) {
    let a = ANCHOR_LEN * k as f64;
    (a, a + ANCHOR_LEN)
}

/// Chart whose disk contains the arc `ARC_I2`, pole at turn 0.
pub fn arc_chart() -> Chart {
    Chart::circle(0.0, 8.0)
}

/// Planar support radius of maps supported in `ARC_I2`.
pub fn arc_support_radius() -> f64 {
    (PI * (0.5 - ARC_I2.0)).tan()
}

/// Chart projecting from the midpoint of anchor arc `k`.
pub fn anchor_chart(k: usize) -> Chart {
    let (a, b) = anchor_arc(k);
    Chart::circle(0.5 * (a + b), 40.0)
}

/// Planar support radius of maps that are the identity on an anchor arc.
pub fn anchor_support_radius() -> f64 {
    (PI * (0.5 - 0.5 * ANCHOR_LEN)).tan()
}

/// `h = h1 ∘ h2` with `h1` supported in `ARC_I2` and `h2` the identity on
/// the anchor arc `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSplit {
    pub h1: SphereMap,
    pub h2: SphereMap,
    pub anchor: Option<usize>,
}

/// Splits an orientation-preserving circle homeomorphism into two pieces
/// supported in fixed overlapping arcs.
pub fn decompose_circle(h: &SphereMap) -> Result<CircleSplit, SphereError> {
    if h.is_identity() {
        return Ok(CircleSplit {
            h1: SphereMap::Identity,
            h2: SphereMap::Identity,
            anchor: None,
        });
    }
    if let Some(d) = h.ambient_dim() {
        if d != 2 {
            return Err(SphereError::Dimension(d));
        }
    }
    let (lo, hi) = ARC_I2;
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for k in 0..ANCHOR_COUNT {
        let (a, b) = anchor_arc(k);
        if a <= lo || b >= hi {
            continue;
        }
        let ha = turns_of(&h.eval(SpherePoint::on_circle(a).coords())?);
        let hb = turns_of(&h.eval(SpherePoint::on_circle(b).coords())?);
        if !(lo < ha && ha < hb && hb < hi) {
            continue;
        }
        let gap = (a - lo).min(hi - b).min(ha - lo).min(hi - hb);
        if best.is_none_or(|(g, ..)| gap > g) {
            best = Some((gap, k, ha, hb));
        }
    }
    let (_, k, ha, hb) =
        best.ok_or_else(|| SphereError::Decomposition("no anchor arc J with J and h(J) inside the large arc".into()))?;
    let tau = SphereMap::CirclePatch {
        outer: ARC_I2,
        from: (ha, hb),
        to: anchor_arc(k),
        inner: Box::new(h.inverse()),
    };
    Ok(CircleSplit {
        h1: tau.inverse(),
        h2: SphereMap::Compose {
            maps: vec![tau, h.clone()],
        },
        anchor: Some(k),
    })
}

/// `R_θ = T1 ∘ T2` with twists `T1` fixing the south cap `z <= -1/2` and
/// `T2` fixing the north cap `z >= 1/2`.
pub fn decompose_sphere_rotation(theta: f64) -> (SphereMap, SphereMap) {
    if SphereMap::sphere_rotation(theta).is_identity() {
        return (SphereMap::Identity, SphereMap::Identity);
    }
    (
        SphereMap::Twist {
            theta,
            ramp: Ramp::Rising,
        },
        SphereMap::Twist {
            theta,
            ramp: Ramp::Falling,
        },
    )
}

/// Sphere charts for the two twist factors and their planar support radius.
pub fn twist_charts() -> (Chart, Chart) {
    (Chart::from_south(8.0), Chart::from_north(8.0))
}

pub fn twist_support_radius() -> f64 {
    3f64.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        crate::scalar::dist_f64(a, b)
    }

    #[test]
    fn identity_splits_trivially() {
        let s = decompose_circle(&SphereMap::Identity).unwrap();
        assert_eq!(s.h1, SphereMap::Identity);
        assert_eq!(s.h2, SphereMap::Identity);
    }

    #[test]
    fn rotation_split_reconstructs() {
        let h = SphereMap::circle_rotation(0.3);
        let s = decompose_circle(&h).unwrap();
        let (a, b) = anchor_arc(s.anchor.unwrap());
        for i in 0..1000 {
            let t = i as f64 / 1000.0;
            let v = SpherePoint::on_circle(t);
            let y = s.h1.eval(&s.h2.eval(v.coords()).unwrap()).unwrap();
            assert!(dist(&y, &h.eval(v.coords()).unwrap()) < 1e-12);
            if t <= ARC_I2.0 || t >= ARC_I2.1 {
                assert_eq!(s.h1.eval(v.coords()).unwrap(), v.coords());
            }
            if t >= a && t <= b {
                assert!(dist(&s.h2.eval(v.coords()).unwrap(), v.coords()) < 1e-14);
            }
        }
    }

    #[test]
    fn twist_pair_is_rotation() {
        let (t1, t2) = decompose_sphere_rotation(1.0);
        let r = SphereMap::sphere_rotation(1.0);
        let v = [0.36, 0.48, 0.8];
        let y = t1.eval(&t2.eval(&v).unwrap()).unwrap();
        assert!(dist(&y, &r.eval(&v).unwrap()) < 1e-15);
        let south = [0.6, 0.0, -0.8];
        assert_eq!(t1.eval(&south).unwrap(), south);
        let north = [0.6, 0.0, 0.8];
        assert_eq!(t2.eval(&north).unwrap(), north);
    }
}
