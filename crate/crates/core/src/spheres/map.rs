use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::chart::{turns_of, Chart, SpherePoint};
use super::SphereError;
use crate::geomaps::MapExpr;
use crate::scalar::norm_f64;

/// Largest power materialized by repeated composition.
pub const POWER_CAP: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// 0 for `z <= -1/2`, 1 for `z >= 1/2`.
    Rising,
    /// `1 - rising`.
    Falling,
}

impl Ramp {
    pub fn weight(self, z: f64) -> f64 {
        let up = (z + 0.5).clamp(0.0, 1.0);
        match self {
            Ramp::Rising => up,
            Ramp::Falling => 1.0 - up,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereMap {
    Identity,
    /// Circle rotation by `alpha` turns.
    CircleRotation {
        alpha: f64,
    },
    /// Rotation of `S^2` about the z-axis by `theta` radians.
    SphereRotation {
        theta: f64,
    },
    /// `(φ, z) ↦ (φ + θ β(z), z)` on `S^2`.
    Twist {
        theta: f64,
        ramp: Ramp,
    },
    /// Circle map supported in the arc `outer`: equal to `inner` on
    /// `from` (sending it onto `to`), linear in turns on the two gaps.
    CirclePatch {
        outer: (f64, f64),
        from: (f64, f64),
        to: (f64, f64),
        inner: Box<SphereMap>,
    },
    /// `σ⁻¹ ∘ m ∘ σ` for a chart `σ`.
    Transported {
        map: MapExpr,
        chart: Chart,
    },
    /// `maps[0] ∘ … ∘ maps[k-1]`.
    Compose {
        maps: Vec<SphereMap>,
    },
}

fn rotate_plane(v: &[f64], angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = v.to_vec();
    out[0] = c * v[0] - s * v[1];
    out[1] = s * v[0] + c * v[1];
    out
}

fn reduce_turns(a: f64) -> f64 {
    let r = a.rem_euclid(1.0);
    if r > 0.5 {
        r - 1.0
    } else {
        r
    }
}

fn reduce_radians(a: f64) -> f64 {
    TAU * reduce_turns(a / TAU)
}

impl SphereMap {
    pub fn circle_rotation(alpha: f64) -> Self {
        SphereMap::CircleRotation { alpha }
    }

    pub fn sphere_rotation(theta: f64) -> Self {
        SphereMap::SphereRotation { theta }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            SphereMap::Identity => true,
            SphereMap::CircleRotation { alpha } => reduce_turns(*alpha) == 0.0,
            SphereMap::SphereRotation { theta } | SphereMap::Twist { theta, .. } => reduce_radians(*theta) == 0.0,
            SphereMap::CirclePatch { .. } => false,
            SphereMap::Transported { map, .. } => map.is_identity(),
            SphereMap::Compose { maps } => maps.iter().all(|m| m.is_identity()),
        }
    }

    /// Ambient dimension if determined (2 for circle maps, 3 for `S^2`).
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            SphereMap::Identity => None,
            SphereMap::CircleRotation { .. } | SphereMap::CirclePatch { .. } => Some(2),
            SphereMap::SphereRotation { .. } | SphereMap::Twist { .. } => Some(3),
            SphereMap::Transported { chart, .. } => Some(chart.ambient_dim()),
            SphereMap::Compose { maps } => maps.iter().find_map(|m| m.ambient_dim()),
        }
    }

    fn check(&self, v: &[f64]) -> Result<(), SphereError> {
        if let Some(d) = self.ambient_dim() {
            if v.len() != d {
                return Err(SphereError::Dimension(v.len()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, v: &[f64]) -> Result<Vec<f64>, SphereError> {
        self.check(v)?;
        self.apply(v, false)
    }

    pub fn eval_inverse(&self, v: &[f64]) -> Result<Vec<f64>, SphereError> {
        self.check(v)?;
        self.apply(v, true)
    }

    pub fn eval_point(&self, p: &SpherePoint) -> Result<Vec<f64>, SphereError> {
        self.eval(p.coords())
    }

    fn apply(&self, v: &[f64], inv: bool) -> Result<Vec<f64>, SphereError> {
        let sign = if inv { -1.0 } else { 1.0 };
        Ok(match self {
            SphereMap::Identity => v.to_vec(),
            SphereMap::CircleRotation { alpha } => rotate_plane(v, sign * TAU * reduce_turns(*alpha)),
            SphereMap::SphereRotation { theta } => rotate_plane(v, sign * reduce_radians(*theta)),
            SphereMap::Twist { theta, ramp } => {
                let w = ramp.weight(v[2]);
                if w == 0.0 {
                    v.to_vec()
                } else {
                    rotate_plane(v, sign * reduce_radians(*theta) * w)
                }
            }
            SphereMap::CirclePatch { outer, from, to, inner } => {
                let (src, dst) = if inv { (to, from) } else { (from, to) };
                let t = turns_of(v);
                if t <= outer.0 || t >= outer.1 {
                    return Ok(v.to_vec());
                }
                if t >= src.0 && t <= src.1 {
                    return inner.apply(v, inv);
                }
                let s = if t < src.0 {
                    outer.0 + (t - outer.0) * (dst.0 - outer.0) / (src.0 - outer.0)
                } else {
                    dst.1 + (t - src.1) * (outer.1 - dst.1) / (outer.1 - src.1)
                };
                SpherePoint::on_circle(s).coords().to_vec()
            }
            SphereMap::Transported { map, chart } => {
                if chart.pole_gap(v) <= 0.0 {
                    return Ok(v.to_vec());
                }
                let x = chart.forward(v);
                if norm_f64(&x) >= map.support_radius() {
                    return Ok(v.to_vec());
                }
                let y = if inv { map.apply_inverse(&x)? } else { map.apply(&x)? };
                chart.backward(&y)
            }
            SphereMap::Compose { maps } => {
                let mut y = v.to_vec();
                if inv {
                    for m in maps {
                        y = m.apply(&y, true)?;
                    }
                } else {
                    for m in maps.iter().rev() {
                        y = m.apply(&y, false)?;
                    }
                }
                y
            }
        })
    }

    pub fn inverse(&self) -> SphereMap {
        match self {
            SphereMap::Identity => SphereMap::Identity,
            SphereMap::CircleRotation { alpha } => SphereMap::CircleRotation { alpha: -alpha },
            SphereMap::SphereRotation { theta } => SphereMap::SphereRotation { theta: -theta },
            SphereMap::Twist { theta, ramp } => SphereMap::Twist {
                theta: -theta,
                ramp: *ramp,
            },
            SphereMap::CirclePatch { outer, from, to, inner } => SphereMap::CirclePatch {
                outer: *outer,
                from: *to,
                to: *from,
                inner: Box::new(inner.inverse()),
            },
            SphereMap::Transported { map, chart } => SphereMap::Transported {
                map: map.inverse(),
                chart: chart.clone(),
            },
            SphereMap::Compose { maps } => SphereMap::Compose {
                maps: maps.iter().rev().map(|m| m.inverse()).collect(),
            },
        }
    }

    /// `self^p`: angle arithmetic for rotations and twists, repeated
    /// composition (up to [`POWER_CAP`]) otherwise.
    pub fn power(&self, p: i64) -> Result<SphereMap, SphereError> {
        let k = p as f64;
        Ok(match self {
            _ if p == 0 => SphereMap::Identity,
            SphereMap::Identity => SphereMap::Identity,
            SphereMap::CircleRotation { alpha } => SphereMap::CircleRotation {
                alpha: reduce_turns(reduce_turns(*alpha) * k),
            },
            SphereMap::SphereRotation { theta } => SphereMap::SphereRotation {
                theta: reduce_radians(reduce_radians(*theta) * k),
            },
            SphereMap::Twist { theta, ramp } => SphereMap::Twist {
                theta: reduce_radians(*theta) * k,
                ramp: *ramp,
            },
            _ => {
                if p.unsigned_abs() > POWER_CAP {
                    return Err(SphereError::PowerCap(p));
                }
                let base = if p < 0 { self.inverse() } else { self.clone() };
                SphereMap::Compose {
                    maps: vec![base; p.unsigned_abs() as usize],
                }
            }
        })
    }
}

/// Transports a planar map to the sphere through `chart`.
pub fn transport(m: &MapExpr, chart: &Chart) -> Result<SphereMap, SphereError> {
    if m.dim() != chart.plane_dim() {
        return Err(SphereError::Dimension(m.dim()));
    }
    if m.is_identity() {
        return Ok(SphereMap::Identity);
    }
    let r = m.support_radius();
    if r > chart.disk_radius {
        return Err(SphereError::SupportEscapesChart {
            support: r,
            disk: chart.disk_radius,
        });
    }
    Ok(SphereMap::Transported {
        map: m.clone(),
        chart: chart.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn rotation_power_by_angle() {
        let r = SphereMap::circle_rotation(0.3);
        let p = r.power(7).unwrap();
        let mut v = vec![1.0, 0.0];
        for _ in 0..7 {
            v = r.eval(&v).unwrap();
        }
        assert!(close(&p.eval(&[1.0, 0.0]).unwrap(), &v, 1e-14));
        assert!(matches!(p, SphereMap::CircleRotation { .. }));
    }

    #[test]
    fn patch_inverse() {
        let h = SphereMap::circle_rotation(0.1);
        let patch = SphereMap::CirclePatch {
            outer: (0.125, 0.875),
            from: (0.35, 0.4),
            to: (0.25, 0.3),
            inner: Box::new(h.inverse()),
        };
        for i in 0..100 {
            let v = SpherePoint::on_circle(i as f64 / 100.0);
            let y = patch.eval(v.coords()).unwrap();
            let back = patch.eval_inverse(&y).unwrap();
            assert!(close(&back, v.coords(), 1e-13), "{i}");
        }
        let out = SpherePoint::on_circle(0.05);
        assert_eq!(patch.eval(out.coords()).unwrap(), out.coords());
    }

    #[test]
    fn transport_identity_and_escape() {
        let c = Chart::circle(0.0, 8.0);
        assert_eq!(transport(&MapExpr::identity(1), &c).unwrap(), SphereMap::Identity);
        let big = MapExpr::translation(vec![0.0], vec![1.0], 5.0, 9.0).unwrap();
        assert!(matches!(
            transport(&big, &c),
            Err(SphereError::SupportEscapesChart { .. })
        ));
    }

    #[test]
    fn power_cap() {
        let c = Chart::circle(0.0, 8.0);
        let m = MapExpr::translation(vec![0.0], vec![0.2], 0.5, 1.0).unwrap();
        let t = transport(&m, &c).unwrap();
        assert!(t.power(10_000).is_ok());
        assert!(matches!(t.power(10_001), Err(SphereError::PowerCap(10_001))));
    }
}
