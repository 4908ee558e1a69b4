//! Generating sets, plans and verified words for distortion witnesses.
//!
//! A [`WitnessPlan`] fixes the geometry (the integer sequences `l_n`, `l̃_n`
//! and the regions `U_n`, `V_n`) before any target is known, so the bound
//! [`WitnessPlan::k_bound`] is a function of the plan alone.

mod generators;
mod plan;
mod schedule;
mod session;
mod swindle;
mod verify;

use thiserror::Error;

pub use generators::{
    build_generators, build_generators_sparse, check_support, commutator_word, f_hat_word, f_n_word, f_tilde_word,
    Generators, Target, F1, F2, F3, F4, F5,
};
pub use plan::{containment_gap, l_sequence, BaseGenerators, GeneratorParams, PlanCheck, WitnessPlan, PUSH_LIPSCHITZ};
pub use schedule::{
    circle_distance, convergent_denominators, scale_for_final_ratio, schedule_powers, schedule_with_recurrence,
};
pub use session::{run_session, SessionReport, WitnessRecord, WitnessSession};
pub use swindle::{
    contraction, homeo_witness, homeo_word, standard_conjugator, swindle_factorize, swindle_factorize_with,
    ContinuityRow, HomeoBundle, SwindleFactorization, BASE_ANNULUS, CONJ,
};
pub use verify::{
    commutator_oracle, commutator_witness, commutator_witness_report, eval_word, sup_word_error, VerificationReport,
    VerifyOptions, Witness,
};

use crate::geomaps::MapError;
use crate::words::WordError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("plan verification failed: {0}")]
    PlanCheck(String),
    #[error("slot {slot}: map moves a point at radius {radius} (outside the allowed support)")]
    SupportViolation { slot: usize, radius: f64 },
    #[error("{count} targets exceed the {n_max} available slots")]
    SlotOverflow { count: usize, n_max: usize },
    #[error("slot {0} holds no target")]
    SlotEmpty(usize),
    #[error("slot {n} out of range (plan has {n_max} slots)")]
    OutOfRange { n: usize, n_max: usize },
    #[error("slot {n}: sup error {sup_err:e} not below tolerance {tol:e}")]
    Verification { n: usize, sup_err: f64, tol: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Word(#[from] WordError),
}
