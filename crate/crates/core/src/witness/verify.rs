use serde::{Deserialize, Serialize};

use super::generators::{commutator_word, Generators};
use super::WitnessError;
use crate::geomaps::{MapExpr, Sampler};
use crate::scalar::{dist_f64, lift, lower, DoubleDouble, Precision};
use crate::words::{Assignment, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: usize,
    /// Samples are drawn uniformly from `B(0, radius)`.
    pub radius: f64,
    pub seed: u64,
    pub tol: f64,
    pub precision: Precision,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 1000,
            radius: 2.5,
            seed: 0,
            tol: 1e-6,
            precision: Precision::Double,
        }
    }
}

impl VerifyOptions {
    pub fn points(&self, dim: usize, salt: u64) -> Vec<Vec<f64>> {
        Sampler::ball(dim, self.radius, self.samples, self.seed.wrapping_add(salt)).points(dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub sup_err: f64,
    pub reduced_len: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    pub word: Word,
    pub k_bound: u64,
    pub unreduced_len: usize,
    pub report: VerificationReport,
}

impl Witness {
    pub fn ensure(self, tol: f64) -> Result<Self, WitnessError> {
        if self.report.passed {
            Ok(self)
        } else {
            Err(WitnessError::Verification {
                n: self.n,
                sup_err: self.report.sup_err,
                tol,
            })
        }
    }
}

/// Evaluates `w` under `asg` at `x` in the requested precision.
pub fn eval_word(asg: &Assignment, w: &Word, x: &[f64], precision: Precision) -> Result<Vec<f64>, WitnessError> {
    Ok(match precision {
        Precision::Double => asg.evaluate(w, x)?,
        Precision::DoubleDouble => lower(&asg.evaluate::<DoubleDouble>(w, &lift(x))?),
    })
}

/// `sup |w(x) - target(x)|` over `points`.
pub fn sup_word_error(
    asg: &Assignment,
    w: &Word,
    target: &dyn Fn(&[f64]) -> Result<Vec<f64>, WitnessError>,
    points: &[Vec<f64>],
    precision: Precision,
) -> Result<f64, WitnessError> {
    let mut worst = 0.0f64;
    for x in points {
        let e = dist_f64(&eval_word(asg, w, x, precision)?, &target(x)?);
        if !e.is_finite() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(e);
    }
    Ok(worst)
}

/// `f g f⁻¹ g⁻¹ (x)` evaluated directly.
pub fn commutator_oracle(f: &MapExpr, g: &MapExpr, x: &[f64]) -> Result<Vec<f64>, WitnessError> {
    let y = g.apply_inverse(x)?;
    let y = f.apply_inverse(&y)?;
    let y = g.apply(&y)?;
    Ok(f.apply(&y)?)
}

pub(crate) fn assemble(n: usize, word: Word, k_bound: u64, sup_err: f64, samples: usize, tol: f64) -> Witness {
    let unreduced_len = word.len();
    let reduced = word.reduce();
    let reduced_len = reduced.len();
    Witness {
        n,
        k_bound,
        unreduced_len,
        report: VerificationReport {
            samples,
            sup_err,
            reduced_len,
            passed: sup_err < tol && reduced_len as u64 <= k_bound,
        },
        word: reduced,
    }
}

/// Witness for slot `n` without failing on a bad verification.
pub fn commutator_witness_report(gens: &Generators, n: usize, opts: &VerifyOptions) -> Result<Witness, WitnessError> {
    let plan = gens.plan();
    let k = plan.k_bound(n)?;
    let word = commutator_word(plan, n)?;
    let (f, g) = gens.pair(n)?;
    let pts = opts.points(plan.dim(), n as u64);
    let asg = gens.assignment();
    let err = sup_word_error(&asg, &word, &|x| commutator_oracle(f, g, x), &pts, opts.precision)?;
    Ok(assemble(n, word, k, err, pts.len(), opts.tol))
}

/// Verified word for `[f_n, g_n]` over `F1..F5`.
pub fn commutator_witness(gens: &Generators, n: usize, opts: &VerifyOptions) -> Result<Witness, WitnessError> {
    commutator_witness_report(gens, n, opts)?.ensure(opts.tol)
}
