//! Sequential model-based hyperparameter search.
//!
//! A Latin hypercube bootstrap seeds a Gaussian-process surrogate of the
//! training objective; each further trial is the expected-improvement argmax
//! over a fresh batch of LHS candidates. All search happens in the unit cube
//! and configurations are decoded (log scales, discrete snapping) only when
//! handed to the trainer.

mod gp;
mod space;
mod trials;

pub use gp::{expected_improvement, gp_fit, GpConfig, GpModel};
pub use space::{bootstrap_count, lhs_sample, lhs_unit, Domain, Param, ParamSpec, Scale, SearchSpace};
pub use trials::{
    propose_next, read_best_json, read_trial_json, read_trials_csv, run_trials, trial_file_name,
    trial_seed, write_best_json, write_trial_json, write_trials_csv, BestHyperparams, TrialPhase,
    TrialRecord, TrialRow, TrialStatus, TuneOutcome, TunerConfig, TRIALS_CSV_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum AutotuneError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("need at least 2 completed trials to fit a surrogate, have {have}")]
    InsufficientData { have: usize },
    #[error("all trial inputs are identical")]
    DegenerateDesign,
    #[error("surrogate fit failed: {0}")]
    Gp(String),
    #[error("all {trials} trials failed")]
    AllTrialsFailed { trials: usize },
    #[error("{0}")]
    Io(String),
}
