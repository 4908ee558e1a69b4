use serde::{Deserialize, Serialize};

use super::plan::WitnessPlan;
use super::WitnessError;
use crate::geomaps::{random_on_sphere, seeded_rng, MapExpr};
use crate::words::{Assignment, Word};

pub const F1: &str = "F1";
pub const F2: &str = "F2";
pub const F3: &str = "F3";
pub const F4: &str = "F4";
pub const F5: &str = "F5";

/// One input of a witness run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Witness the commutator `[f, g]`.
    Pair { f: MapExpr, g: MapExpr },
    /// Witness `h` itself through its swindle factorization.
    Plain { h: MapExpr },
}

/// Spot-checks that `m` fixes sampled points with `|x| >= radius`.
pub fn check_support(m: &MapExpr, radius: f64, slot: usize, seed: u64) -> Result<(), WitnessError> {
    let declared = m.support_radius();
    if declared > radius {
        return Err(WitnessError::SupportViolation { slot, radius: declared });
    }
    let mut rng = seeded_rng(seed ^ slot as u64);
    for i in 0..200 {
        let r = radius * (1.0 + i as f64 / 200.0);
        let x = random_on_sphere(&mut rng, m.dim(), r);
        if m.apply(&x)? != x {
            return Err(WitnessError::SupportViolation { slot, radius: r });
        }
    }
    Ok(())
}

/// The full alphabet `F1..F5` for one plan and one set of commutator pairs.
#[derive(Clone, Debug)]
pub struct Generators {
    plan: WitnessPlan,
    f4: MapExpr,
    f5: MapExpr,
    slots: Vec<Option<(MapExpr, MapExpr)>>,
}

/// Builds `F4`, `F5` from pairs placed in consecutive slots.
pub fn build_generators(plan: &WitnessPlan, pairs: &[(MapExpr, MapExpr)]) -> Result<Generators, WitnessError> {
    let slots: Vec<Option<(MapExpr, MapExpr)>> = pairs.iter().cloned().map(Some).collect();
    build_generators_sparse(plan, &slots)
}

/// As [`build_generators`], with unused slots left empty.
pub fn build_generators_sparse(
    plan: &WitnessPlan,
    slots: &[Option<(MapExpr, MapExpr)>],
) -> Result<Generators, WitnessError> {
    if slots.len() > plan.n_max {
        return Err(WitnessError::SlotOverflow {
            count: slots.len(),
            n_max: plan.n_max,
        });
    }
    let dim = plan.dim();
    let mut p4 = Vec::new();
    let mut p5 = Vec::new();
    for (n, slot) in slots.iter().enumerate() {
        let Some((f, g)) = slot else { continue };
        for m in [f, g] {
            if m.dim() != dim {
                return Err(WitnessError::Map(crate::geomaps::MapError::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                }));
            }
            check_support(m, plan.params.support_radius, n, 0x5eed)?;
        }
        let ft = plan.f_tilde(n)?;
        let v = plan.v_region(n)?;
        let conj = |m: &MapExpr| MapExpr::compose(dim, &[ft.clone(), m.clone(), ft.inverse()]);
        if !f.is_identity() {
            p4.push((v.clone(), conj(f)?));
        }
        if !g.is_identity() {
            p5.push((v, conj(g)?));
        }
    }
    Ok(Generators {
        plan: plan.clone(),
        f4: MapExpr::piecewise_union(dim, p4)?,
        f5: MapExpr::piecewise_union(dim, p5)?,
        slots: slots.to_vec(),
    })
}

impl Generators {
    pub fn plan(&self) -> &WitnessPlan {
        &self.plan
    }

    pub fn f4(&self) -> &MapExpr {
        &self.f4
    }

    pub fn f5(&self) -> &MapExpr {
        &self.f5
    }

    pub fn pair(&self, n: usize) -> Result<&(MapExpr, MapExpr), WitnessError> {
        self.slots
            .get(n)
            .and_then(|s| s.as_ref())
            .ok_or(WitnessError::SlotEmpty(n))
    }

    pub fn assignment(&self) -> Assignment {
        let b = self.plan.base();
        let mut a = Assignment::new(self.plan.dim());
        for (name, m) in [(F1, &b.f1), (F2, &b.f2), (F3, &b.f3), (F4, &self.f4), (F5, &self.f5)] {
            a.bind(name, m.clone())
                .expect("all generators share the plan dimension");
        }
        a
    }
}

/// `F3^n F1^l`.
pub fn f_n_word(plan: &WitnessPlan, n: usize) -> Result<Word, WitnessError> {
    plan.check_slot(n)?;
    Ok(Word::gen_pow(F3, n as i64).concat(&Word::gen_pow(F1, plan.l[n] as i64)))
}

/// `F3^n F1^l̃`.
pub fn f_tilde_word(plan: &WitnessPlan, n: usize) -> Result<Word, WitnessError> {
    plan.check_slot(n)?;
    Ok(Word::gen_pow(F3, n as i64).concat(&Word::gen_pow(F1, plan.l_tilde[n] as i64)))
}

/// `F_n F2 F_n⁻¹`.
pub fn f_hat_word(plan: &WitnessPlan, n: usize) -> Result<Word, WitnessError> {
    let f = f_n_word(plan, n)?;
    Ok(Word::product(&[&f, &Word::gen(F2), &f.inverse()]))
}

/// The spelled-out identity `[f_n, g_n] = F̃⁻¹ A B C F̃` with
/// `A = [F4, F̂]`, `B = [F5, F̂]`, `C = F4⁻¹ F5⁻¹ F̂ F5 F4 F̂⁻¹`.
pub fn commutator_word(plan: &WitnessPlan, n: usize) -> Result<Word, WitnessError> {
    let fh = f_hat_word(plan, n)?;
    let fhi = fh.inverse();
    let ft = f_tilde_word(plan, n)?;
    let f4 = Word::gen(F4);
    let f5 = Word::gen(F5);
    let a = Word::product(&[&f4, &fh, &f4.inverse(), &fhi]);
    let b = Word::product(&[&f5, &fh, &f5.inverse(), &fhi]);
    let c = Word::product(&[&f4.inverse(), &f5.inverse(), &fh, &f5, &f4, &fhi]);
    Ok(Word::product(&[&ft.inverse(), &a, &b, &c, &ft]))
}
