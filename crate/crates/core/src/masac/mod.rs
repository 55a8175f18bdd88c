//! Multi-agent soft actor-critic with centralized critics and decentralized
//! actors.
//!
//! Each agent owns an actor that sees only its local observation and a
//! critic that sees every agent's observation and action. Training follows
//! the usual off-policy loop: warm-up with uniform random actions until the
//! replay buffer holds a mini-batch, then per step and per agent one critic
//! and one actor update, followed by soft target updates.

mod agent;
mod envs;
mod hyper;
mod replay;
mod train;

pub use agent::{
    actor_loss_grad, actor_update, critic_input, critic_loss_grad, critic_target, critic_update,
    soft_update, AgentNets, Batch, JointLayout,
};
pub use envs::{power_scales, EnvTransition, MmgTask, MultiAgentEnv, ToyEnv};
pub use hyper::{SacHyperparams, SoftUpdateSchedule};
pub use replay::{JointTransition, ReplayBuffer};
pub use train::{
    convergence_episode, evaluate, moving_mean, read_rewards_csv, tail_mean, train, train_mmg,
    train_with, write_rewards_csv, DecentralizedPolicy, EpisodeRecord, Evaluation, TrainingReport,
};

use crate::env::EnvError;
use crate::neural::NeuralError;

#[derive(Debug, thiserror::Error)]
pub enum MasacError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("replay buffer holds {have} transitions, need {need}")]
    BufferUnderfilled { have: usize, need: usize },
    #[error("non-finite {what} loss for agent {agent}")]
    NonFiniteLoss { agent: usize, what: &'static str },
    #[error("training diverged in episode {episode}: non-finite {what}")]
    Divergence {
        episode: usize,
        agent: usize,
        what: &'static str,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("report: {0}")]
    Report(String),
}
