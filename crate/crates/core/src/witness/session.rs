use serde::{Deserialize, Serialize};

use super::generators::{build_generators, commutator_word, Target};
use super::plan::{GeneratorParams, WitnessPlan};
use super::swindle::{homeo_word, standard_conjugator, swindle_factorize_with, CONJ};
use super::verify::{assemble, commutator_oracle, sup_word_error, VerifyOptions};
use super::WitnessError;
use crate::scalar::Precision;

/// Input document of a witness run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSession {
    pub params: GeneratorParams,
    pub n_max: usize,
    #[serde(default)]
    pub targets: Vec<Target>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub n: usize,
    pub kind: String,
    pub k_bound: u64,
    pub unreduced_len: usize,
    pub reduced_len: usize,
    pub sup_err: f64,
    pub samples: usize,
    pub passed: bool,
    pub word: crate::words::Word,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub seed: u64,
    pub tol: f64,
    pub precision: Precision,
    pub n_max: usize,
    pub l: Vec<u32>,
    pub l_tilde: Vec<u32>,
    pub k_bounds: Vec<u64>,
    pub witnesses: Vec<WitnessRecord>,
}

impl SessionReport {
    pub fn passed(&self) -> bool {
        self.witnesses.iter().all(|w| w.passed)
    }
}

/// Builds the plan and generators for a mixed target list and verifies one
/// word per slot. Plain targets go through the swindle factorization and are
/// conjugated by `D`.
pub fn run_session(session: &WitnessSession, opts: &VerifyOptions) -> Result<SessionReport, WitnessError> {
    let plan = WitnessPlan::build(session.params.clone(), session.n_max)?;
    let dim = plan.dim();
    let d = standard_conjugator(dim);
    let mut pairs = Vec::with_capacity(session.targets.len());
    for t in &session.targets {
        pairs.push(match t {
            Target::Pair { f, g } => (f.clone(), g.clone()),
            Target::Plain { h } => {
                let fz = swindle_factorize_with(h, &d)?;
                (fz.g, fz.phi)
            }
        });
    }
    let gens = build_generators(&plan, &pairs)?;
    let mut asg = gens.assignment();
    asg.bind(CONJ, d)?;
    let mut records = Vec::with_capacity(pairs.len());
    for (n, t) in session.targets.iter().enumerate() {
        let pts = opts.points(dim, n as u64);
        let (kind, w) = match t {
            Target::Pair { f, g } => {
                let word = commutator_word(&plan, n)?;
                let err = sup_word_error(&asg, &word, &|x| commutator_oracle(f, g, x), &pts, opts.precision)?;
                ("pair", assemble(n, word, plan.k_bound(n)?, err, pts.len(), opts.tol))
            }
            Target::Plain { h } => {
                let word = homeo_word(&plan, n, h.is_identity())?;
                let err = sup_word_error(&asg, &word, &|x| Ok(h.apply(x)?), &pts, opts.precision)?;
                (
                    "plain",
                    assemble(n, word, plan.homeo_k_bound(n)?, err, pts.len(), opts.tol),
                )
            }
        };
        records.push(WitnessRecord {
            n,
            kind: kind.to_string(),
            k_bound: w.k_bound,
            unreduced_len: w.unreduced_len,
            reduced_len: w.report.reduced_len,
            sup_err: w.report.sup_err,
            samples: w.report.samples,
            passed: w.report.passed,
            word: w.word,
        });
    }
    Ok(SessionReport {
        seed: opts.seed,
        tol: opts.tol,
        precision: opts.precision,
        n_max: plan.n_max,
        l: plan.l.clone(),
        l_tilde: plan.l_tilde.clone(),
        k_bounds: plan.k_bounds(),
        witnesses: records,
    })
}
