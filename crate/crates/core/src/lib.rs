//! Multi-microgrid collaborative dispatch.
//!
//! The crate is split along the lines of the system it models:
//!
//! - [`domain`]: microgrid parameters, scenarios, scenario bundles on disk and
//!   the synthetic scenario generator.
//! - [`env`]: the time-stepped multi-microgrid environment (costs, storage,
//!   trade clearing, power balance, rewards, traces).
//! - [`neural`]: a small dense network stack with exact backpropagation, Adam
//!   and the squashed-Gaussian policy head.
//! - [`masac`]: the multi-agent soft actor-critic trainer with centralized
//!   critics and decentralized actors.
//! - [`autotune`]: Latin-hypercube bootstrap plus Gaussian-process guided
//!   hyperparameter search.
//!
//! All randomness is derived from explicit seeds through [`rng`].

pub mod autotune;
pub mod domain;
pub mod env;
pub mod masac;
pub mod neural;
pub mod rng;

pub use domain::{CostBreakdown, MicrogridParams, Scenario};
pub use env::{AgentAction, MmgEnv, Observation, StepResult};
pub use masac::{SacHyperparams, TrainingReport};
