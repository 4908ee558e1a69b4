use serde::{Deserialize, Serialize};

use super::WitnessError;
use crate::geomaps::{random_in_ball, random_on_sphere, seeded_rng, Ball, MapExpr, Profile, RegionDescriptor};
use crate::scalar::{dist_f64, norm_f64};

/// Certified Lipschitz constant of the default push generator.
pub const PUSH_LIPSCHITZ: f64 = 3.0;

/// Bounding balls are inflated by this factor so they safely contain
/// the regions they guard.
const BOUND_SLACK: f64 = 1.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub dim: usize,
    /// Contraction factor of the radial generator on `B(0, 2)`.
    pub lambda: f64,
    /// Translation vector of the translation generator.
    pub shift: Vec<f64>,
    /// `x0 = e_axis` is the limit of the push orbit of 0.
    #[serde(default)]
    pub axis: usize,
    /// Targets must be supported in `B(0, support_radius)`.
    #[serde(default = "default_support")]
    pub support_radius: f64,
}

fn default_support() -> f64 {
    2.0
}

impl GeneratorParams {
    pub fn defaults(dim: usize) -> Self {
        let mut shift = vec![0.0; dim];
        if dim > 0 {
            shift[0] = 0.5;
        }
        GeneratorParams {
            dim,
            lambda: 0.5,
            shift,
            axis: 0,
            support_radius: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), WitnessError> {
        let bad = |m: String| Err(WitnessError::InvalidParams(m));
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if self.shift.len() != self.dim {
            return bad(format!(
                "shift has {} coordinates, expected {}",
                self.shift.len(),
                self.dim
            ));
        }
        let a = norm_f64(&self.shift);
        if !(a > 0.0 && a < 1.0) {
            return bad(format!("shift norm must lie in (0, 1), got {a}"));
        }
        if self.axis >= self.dim {
            return bad(format!("axis {} out of range for dimension {}", self.axis, self.dim));
        }
        if self.support_radius != 2.0 {
            return bad("target support radius is fixed at 2".into());
        }
        Ok(())
    }

    pub fn shift_norm(&self) -> f64 {
        norm_f64(&self.shift)
    }

    pub fn x0(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        x[self.axis] = 1.0;
        x
    }
}

/// The three fixed generators that build every region and word.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseGenerators {
    pub f1: MapExpr,
    pub f2: MapExpr,
    pub f3: MapExpr,
}

impl BaseGenerators {
    pub fn new(p: &GeneratorParams) -> Result<Self, WitnessError> {
        p.validate()?;
        let f1 = MapExpr::radial(
            p.dim,
            Profile::new(vec![(0.0, 0.0), (2.0, 2.0 * p.lambda), (4.0, 4.0)])?,
        )?;
        let f2 = MapExpr::translation(vec![0.0; p.dim], p.shift.clone(), 1.0, 2.0)?;
        let u = Profile::new(vec![(-1.5, -1.5), (0.0, 0.5), (1.0, 1.0)])?;
        let f3 = MapExpr::push(p.dim, p.axis, u, 0.5, 1.0)?;
        Ok(BaseGenerators { f1, f2, f3 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPlan {
    pub params: GeneratorParams,
    pub n_max: usize,
    pub rho: f64,
    pub l: Vec<u32>,
    pub l_tilde: Vec<u32>,
    #[serde(skip)]
    base: Option<BaseGenerators>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanCheck {
    pub pair_samples: usize,
    pub overlap_violations: usize,
    pub diameters: Vec<f64>,
    pub diameters_decreasing: bool,
    pub diameters_below_dyadic: bool,
    pub displacement_violations: usize,
    pub containment_violations: usize,
}

impl PlanCheck {
    pub fn passed(&self) -> bool {
        self.overlap_violations == 0
            && self.diameters_decreasing
            && self.diameters_below_dyadic
            && self.displacement_violations == 0
            && self.containment_violations == 0
    }
}

/// Least `l` with `2 λ^l L^n <= 2^-(n+3)`, forced strictly increasing.
pub fn l_sequence(lambda: f64, n_max: usize) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let target = 2f64.powi(-(n as i32 + 3));
        let grow = PUSH_LIPSCHITZ.powi(n as i32);
        let mut l = out.last().map_or(1, |&p| p + 1);
        while 2.0 * lambda.powi(l as i32) * grow > target {
            l += 1;
        }
        out.push(l);
    }
    out
}

/// Least `m` with `2 λ^m <= ρ`.
pub fn containment_gap(lambda: f64, rho: f64) -> u32 {
    let mut m = 0u32;
    while 2.0 * lambda.powi(m as i32) > rho {
        m += 1;
    }
    m
}

impl WitnessPlan {
    pub fn build(params: GeneratorParams, n_max: usize) -> Result<Self, WitnessError> {
        let base = BaseGenerators::new(&params)?;
        let rho = params.shift_norm() / 3.0;
        let l = l_sequence(params.lambda, n_max);
        let m = containment_gap(params.lambda, rho);
        let l_tilde = l.iter().map(|&x| x + m).collect();
        Ok(WitnessPlan {
            params,
            n_max,
            rho,
            l,
            l_tilde,
            base: Some(base),
        })
    }

    /// Rebuilds the cached generators after deserialization.
    pub fn restore(self) -> Result<Self, WitnessError> {
        let rebuilt = WitnessPlan::build(self.params.clone(), self.n_max)?;
        if rebuilt.l != self.l || rebuilt.l_tilde != self.l_tilde || rebuilt.rho != self.rho {
            return Err(WitnessError::InvalidParams(
                "stored sequences disagree with params".into(),
            ));
        }
        Ok(rebuilt)
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn base(&self) -> &BaseGenerators {
        self.base.as_ref().expect("plan built through WitnessPlan::build")
    }

    pub fn check_slot(&self, n: usize) -> Result<(), WitnessError> {
        if n >= self.n_max {
            Err(WitnessError::OutOfRange { n, n_max: self.n_max })
        } else {
            Ok(())
        }
    }

    /// Letter count of the spelled-out commutator identity at slot `n`;
    /// depends on the plan only.
    pub fn k_bound(&self, n: usize) -> Result<u64, WitnessError> {
        self.check_slot(n)?;
        Ok(14 * n as u64 + 12 * self.l[n] as u64 + 2 * self.l_tilde[n] as u64 + 14)
    }

    /// Bound for plain targets: the swindle conjugator costs two letters.
    pub fn homeo_k_bound(&self, n: usize) -> Result<u64, WitnessError> {
        Ok(self.k_bound(n)? + 2)
    }

    pub fn k_bounds(&self) -> Vec<u64> {
        (0..self.n_max).map(|n| self.k_bound(n).expect("in range")).collect()
    }

    fn orbit_point(&self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[self.params.axis] = 1.0 - 2f64.powi(-(n as i32));
        c
    }

    fn push_power(&self, n: usize) -> MapExpr {
        self.base().f3.power_exact(n as i64).expect("push powers are exact")
    }

    fn radial_power(&self, l: u32) -> MapExpr {
        self.base().f1.power_exact(l as i64).expect("radial powers are exact")
    }

    /// `F3^n F1^l`.
    pub fn f_n(&self, n: usize) -> Result<MapExpr, WitnessError> {
        self.check_slot(n)?;
        Ok(MapExpr::compose(
            self.dim(),
            &[self.push_power(n), self.radial_power(self.l[n])],
        )?)
    }

    /// `F3^n F1^l̃`.
    pub fn f_tilde(&self, n: usize) -> Result<MapExpr, WitnessError> {
        self.check_slot(n)?;
        Ok(MapExpr::compose(
            self.dim(),
            &[self.push_power(n), self.radial_power(self.l_tilde[n])],
        )?)
    }

    /// `F_n F2 F_n⁻¹`.
    pub fn f_hat(&self, n: usize) -> Result<MapExpr, WitnessError> {
        let f = self.f_n(n)?;
        Ok(MapExpr::compose(
            self.dim(),
            &[f.clone(), self.base().f2.clone(), f.inverse()],
        )?)
    }

    fn region(&self, n: usize, radius: f64) -> Result<RegionDescriptor, WitnessError> {
        let f = self.f_n(n)?;
        let r = radius * self.params.lambda.powi(self.l[n] as i32) * PUSH_LIPSCHITZ.powi(n as i32);
        Ok(RegionDescriptor::new(
            &f,
            radius,
            Some(Ball {
                center: self.orbit_point(n),
                radius: r * BOUND_SLACK,
            }),
        ))
    }

    /// `U_n = F_n(B(0, 2))`.
    pub fn u_region(&self, n: usize) -> Result<RegionDescriptor, WitnessError> {
        self.region(n, 2.0)
    }

    /// `V_n = F_n(B(0, ρ))`.
    pub fn v_region(&self, n: usize) -> Result<RegionDescriptor, WitnessError> {
        self.region(n, self.rho)
    }

    /// Re-verifies the plan geometry on seeded samples.
    pub fn verify(&self, samples: usize, seed: u64) -> Result<PlanCheck, WitnessError> {
        let dim = self.dim();
        let mut rng = seeded_rng(seed);
        let n_max = self.n_max;
        let interior = |rng: &mut _, r: f64| random_in_ball(rng, dim, r * (1.0 - 1e-9));
        let boundary = |rng: &mut _, r: f64| random_on_sphere(rng, dim, r);

        let mut overlap = 0;
        let mut diameters = Vec::with_capacity(n_max);
        for n in 0..n_max {
            let f = self.f_n(n)?;
            let mut pts = Vec::with_capacity(samples);
            for _ in 0..samples {
                let z = interior(&mut rng, 2.0);
                pts.push(f.apply(&z)?);
            }
            for m in 0..n_max {
                if m == n {
                    continue;
                }
                let u = self.u_region(m)?;
                for p in &pts {
                    if u.contains(p)? {
                        overlap += 1;
                    }
                }
            }
            let edge_count = if dim == 1 { 2 } else { samples.min(400) };
            let mut edge = Vec::with_capacity(edge_count);
            for i in 0..edge_count {
                let z = if dim == 1 {
                    vec![if i == 0 { -2.0 } else { 2.0 }]
                } else {
                    boundary(&mut rng, 2.0)
                };
                edge.push(f.apply(&z)?);
            }
            let mut diam = 0.0f64;
            for (i, a) in edge.iter().enumerate() {
                for b in &edge[i + 1..] {
                    diam = diam.max(dist_f64(a, b));
                }
            }
            diameters.push(diam);
        }

        let mut displacement = 0;
        let mut containment = 0;
        for n in 0..n_max {
            let v = self.v_region(n)?;
            let f = self.f_n(n)?;
            let fhat = self.f_hat(n)?;
            let ft = self.f_tilde(n)?;
            for i in 0..samples {
                let z = if i % 2 == 0 {
                    interior(&mut rng, self.rho)
                } else {
                    boundary(&mut rng, self.rho * (1.0 - 1e-9))
                };
                let x = f.apply(&z)?;
                if v.contains(&fhat.apply(&x)?)? {
                    displacement += 1;
                }
                let w = if i % 2 == 0 {
                    interior(&mut rng, 2.0)
                } else {
                    boundary(&mut rng, 2.0)
                };
                if !v.contains(&ft.apply(&w)?)? {
                    containment += 1;
                }
            }
        }

        Ok(PlanCheck {
            pair_samples: samples,
            overlap_violations: overlap,
            diameters_decreasing: diameters.windows(2).all(|w| w[1] < w[0]),
            diameters_below_dyadic: diameters.iter().enumerate().all(|(n, &d)| d < 2f64.powi(-(n as i32))),
            diameters,
            displacement_violations: displacement,
            containment_violations: containment,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sequences() {
        let plan = WitnessPlan::build(GeneratorParams::defaults(2), 6).unwrap();
        assert_eq!(plan.rho, 0.5 / 3.0);
        assert_eq!(plan.l, vec![4, 7, 10, 12, 15, 17]);
        assert_eq!(plan.l_tilde, vec![8, 11, 14, 16, 19, 21]);
        assert_eq!(plan.k_bound(0).unwrap(), 12 * 4 + 2 * 8 + 14);
        assert!(plan.k_bound(6).is_err());
    }

    #[test]
    fn empty_plan() {
        let plan = WitnessPlan::build(GeneratorParams::defaults(2), 0).unwrap();
        assert!(plan.l.is_empty() && plan.k_bounds().is_empty());
        assert!(plan.verify(10, 1).unwrap().passed());
    }

    #[test]
    fn rejects_bad_lambda() {
        let mut p = GeneratorParams::defaults(2);
        p.lambda = 1.5;
        assert!(matches!(WitnessPlan::build(p, 3), Err(WitnessError::InvalidParams(_))));
    }

    #[test]
    fn push_orbit_reaches_orbit_points() {
        let plan = WitnessPlan::build(GeneratorParams::defaults(3), 4).unwrap();
        for n in 0..4 {
            let c = plan.f_n(n).unwrap().apply(&[0.0, 0.0, 0.0]).unwrap();
            assert_eq!(c, plan.orbit_point(n));
        }
    }
}
