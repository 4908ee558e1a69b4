use serde::{Deserialize, Serialize};

use super::generators::{build_generators, check_support, commutator_word, Generators};
use super::plan::WitnessPlan;
use super::verify::{assemble, sup_word_error, VerifyOptions, Witness};
use super::WitnessError;
use crate::geomaps::{random_in_ball, seeded_rng, MapExpr, Profile};
use crate::scalar::{dist_f64, norm_f64};
use crate::words::{Assignment, Word};

/// Name of the swindle conjugator in the extended alphabet.
pub const CONJ: &str = "D";

/// Base annulus `1/2 <= |x| <= 1`; layer `i` is its image under `x ↦ x/2^i`.
pub const BASE_ANNULUS: (f64, f64) = (0.5, 1.0);

/// `φ_c`: exactly `x/2` on `B(0, 1)`, identity outside `B(0, 1.9)`.
pub fn contraction(dim: usize) -> MapExpr {
    let p = Profile::new(vec![(0.0, 0.0), (1.0, 0.5), (1.9, 1.9)]).expect("valid profile");
    MapExpr::radial(dim, p).expect("valid radial map")
}

/// Conjugator shrinking `B(0, 2)` into the interior of the base annulus:
/// scale by 1/16, then translate by `3/4 e_1`.
pub fn standard_conjugator(dim: usize) -> MapExpr {
    let s = MapExpr::radial(
        dim,
        Profile::new(vec![(0.0, 0.0), (2.0, 0.125), (4.0, 4.0)]).expect("valid profile"),
    )
    .expect("valid radial map");
    let mut shift = vec![0.0; dim];
    shift[0] = 0.75;
    let t = MapExpr::translation(vec![0.0; dim], shift, 0.25, 2.0).expect("contractive translation");
    MapExpr::compose(dim, &[t, s]).expect("same dimension")
}

/// `h = d⁻¹ [g, φ_c] d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwindleFactorization {
    pub d: MapExpr,
    pub phi: MapExpr,
    pub g: MapExpr,
    /// `d h d⁻¹`, supported in the base annulus.
    pub inner: MapExpr,
    pub annulus: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub layer: u32,
    pub sup_displacement: f64,
    pub bound: f64,
}

pub fn swindle_factorize(h: &MapExpr) -> Result<SwindleFactorization, WitnessError> {
    swindle_factorize_with(h, &standard_conjugator(h.dim()))
}

/// Factorization with a caller-chosen conjugator; `d` must carry the support
/// of `h` into the open base annulus.
pub fn swindle_factorize_with(h: &MapExpr, d: &MapExpr) -> Result<SwindleFactorization, WitnessError> {
    let dim = h.dim();
    check_support(h, 2.0, 0, 0x5111)?;
    if h.is_identity() {
        return Ok(SwindleFactorization {
            d: d.clone(),
            phi: contraction(dim),
            g: MapExpr::identity(dim),
            inner: MapExpr::identity(dim),
            annulus: BASE_ANNULUS,
        });
    }
    let inner = MapExpr::compose(dim, &[d.clone(), h.clone(), d.inverse()])?;
    let mut rng = seeded_rng(0xa22);
    for _ in 0..400 {
        let x = random_in_ball(&mut rng, dim, 1.0);
        let r = norm_f64(&x);
        let outside = r <= BASE_ANNULUS.0 * 1.001 || r >= BASE_ANNULUS.1 * 0.999;
        if outside && dist_f64(&inner.apply(&x)?, &x) > 1e-12 {
            return Err(WitnessError::SupportViolation { slot: 0, radius: r });
        }
    }
    Ok(SwindleFactorization {
        d: d.clone(),
        phi: contraction(dim),
        g: MapExpr::swindle(&inner),
        inner,
        annulus: BASE_ANNULUS,
    })
}

impl SwindleFactorization {
    /// `d⁻¹ g φ g⁻¹ φ⁻¹ d (x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, WitnessError> {
        let y = self.d.apply(x)?;
        let y = self.phi.apply_inverse(&y)?;
        let y = self.g.apply_inverse(&y)?;
        let y = self.phi.apply(&y)?;
        let y = self.g.apply(&y)?;
        Ok(self.d.apply_inverse(&y)?)
    }

    /// `sup |d⁻¹[g, φ]d(x) - h(x)|` over `points`.
    pub fn sup_error(&self, h: &MapExpr, points: &[Vec<f64>]) -> Result<f64, WitnessError> {
        let mut worst = 0.0f64;
        for x in points {
            worst = worst.max(dist_f64(&self.eval(x)?, &h.apply(x)?));
        }
        Ok(worst)
    }

    /// For each layer `i`, `sup_{|x| <= 2^-i} |g(x) - x|` against
    /// `2^-i (1 + sup |inner - id|)`.
    pub fn continuity(&self, layers: u32, samples: usize, seed: u64) -> Result<Vec<ContinuityRow>, WitnessError> {
        let dim = self.g.dim();
        let mut rng = seeded_rng(seed);
        let mut c = 0.0f64;
        for _ in 0..samples {
            let x = random_in_ball(&mut rng, dim, 1.0);
            c = c.max(dist_f64(&self.inner.apply(&x)?, &x));
        }
        let c = 1.0 + c;
        let mut rows = Vec::with_capacity(layers as usize);
        for i in 0..layers {
            let r = 2f64.powi(-(i as i32));
            let mut sup = 0.0f64;
            for _ in 0..samples {
                let x = random_in_ball(&mut rng, dim, r);
                sup = sup.max(dist_f64(&self.g.apply(&x)?, &x));
            }
            rows.push(ContinuityRow {
                layer: i,
                sup_displacement: sup,
                bound: r * c,
            });
        }
        Ok(rows)
    }
}

/// Witnesses for plain targets, one per slot, over `F1..F5` and `D`.
#[derive(Clone, Debug)]
pub struct HomeoBundle {
    pub generators: Generators,
    pub conjugator: MapExpr,
    pub factorizations: Vec<SwindleFactorization>,
    pub witnesses: Vec<Witness>,
}

impl HomeoBundle {
    pub fn assignment(&self) -> Assignment {
        let mut a = self.generators.assignment();
        a.bind(CONJ, self.conjugator.clone()).expect("same dimension");
        a
    }
}

/// `D⁻¹ w_n D` for slot `n`, or the empty word for an identity target.
pub fn homeo_word(plan: &WitnessPlan, n: usize, identity: bool) -> Result<Word, WitnessError> {
    if identity {
        plan.check_slot(n)?;
        return Ok(Word::empty());
    }
    let d = Word::gen(CONJ);
    Ok(Word::product(&[&d.inverse(), &commutator_word(plan, n)?, &d]))
}

/// Swindle-factorizes each target and emits verified words (reports are
/// attached; failures do not abort).
pub fn homeo_witness(plan: &WitnessPlan, hs: &[MapExpr], opts: &VerifyOptions) -> Result<HomeoBundle, WitnessError> {
    let dim = plan.dim();
    let d = standard_conjugator(dim);
    let mut facts = Vec::with_capacity(hs.len());
    let mut pairs = Vec::with_capacity(hs.len());
    for h in hs {
        let f = swindle_factorize_with(h, &d)?;
        pairs.push((f.g.clone(), f.phi.clone()));
        facts.push(f);
    }
    let generators = build_generators(plan, &pairs)?;
    let mut bundle = HomeoBundle {
        generators,
        conjugator: d,
        factorizations: facts,
        witnesses: Vec::with_capacity(hs.len()),
    };
    let asg = bundle.assignment();
    for (n, h) in hs.iter().enumerate() {
        let word = homeo_word(plan, n, h.is_identity())?;
        let pts = opts.points(dim, n as u64);
        let err = sup_word_error(&asg, &word, &|x| Ok(h.apply(x)?), &pts, opts.precision)?;
        bundle
            .witnesses
            .push(assemble(n, word, plan.homeo_k_bound(n)?, err, pts.len(), opts.tol));
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugator_lands_in_annulus() {
        let d = standard_conjugator(2);
        for p in [[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, 0.0]] {
            let r = norm_f64(&d.apply(&p).unwrap());
            assert!(r > 0.6 && r < 0.9, "{r}");
        }
    }

    #[test]
    fn base_layer_equals_target() {
        let h = MapExpr::translation(vec![0.75, 0.0], vec![0.05, 0.0], 0.02, 0.1).unwrap();
        let f = swindle_factorize_with(&h, &MapExpr::identity(2)).unwrap();
        let x = [0.74, 0.01];
        assert_eq!(f.g.apply(&x).unwrap(), h.apply(&x).unwrap());
        // one layer down: g(x) = h(2x)/2
        let y = [0.37, 0.005];
        let expect: Vec<f64> = h.apply(&[0.74, 0.01]).unwrap().iter().map(|c| c / 2.0).collect();
        assert_eq!(f.g.apply(&y).unwrap(), expect);
        let phi_route = f
            .phi
            .apply(&h.apply(&f.phi.apply_inverse(&y).unwrap()).unwrap())
            .unwrap();
        assert_eq!(f.g.apply(&y).unwrap(), phi_route);
    }

    #[test]
    fn identity_target() {
        let f = swindle_factorize(&MapExpr::identity(2)).unwrap();
        assert!(f.g.is_identity());
    }

    #[test]
    fn rejects_wide_support() {
        let h = MapExpr::translation(vec![0.0, 0.0], vec![0.5, 0.0], 2.0, 3.0).unwrap();
        assert!(matches!(
            swindle_factorize(&h),
            Err(WitnessError::SupportViolation { .. })
        ));
    }
}
