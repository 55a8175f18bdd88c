use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmg_core::domain::ParamSet;
use mmg_core::masac::SoftUpdateSchedule;

#[derive(Debug, Parser)]
#[command(name = "mmg", version, about = "Multi-microgrid dispatch with multi-agent soft actor-critic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic scenario bundle.
    GenData(GenDataArgs),
    /// Train agents on a scenario and write rewards, checkpoints and a summary.
    Train(TrainArgs),
    /// Roll out trained actors and write the per-step trace.
    Eval(EvalArgs),
    /// Train with and without inter-microgrid trading and compare costs.
    CompareModes(CompareArgs),
    /// Search hyperparameters with an LHS bootstrap and a GP surrogate.
    Tune(TuneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Inter-microgrid trading enabled.
    Coupled,
    /// Each microgrid trades only with the grid.
    Isolated,
}

impl Mode {
    pub fn trading_enabled(self) -> bool {
        self == Mode::Coupled
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SoftUpdateArg {
    PerStep,
    PerEpisode,
}

impl From<SoftUpdateArg> for SoftUpdateSchedule {
    fn from(a: SoftUpdateArg) -> Self {
        match a {
            SoftUpdateArg::PerStep => SoftUpdateSchedule::PerStep,
            SoftUpdateArg::PerEpisode => SoftUpdateSchedule::PerEpisode,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub n_mg: usize,
    #[arg(long, default_value_t = 24)]
    pub horizon: usize,
    #[arg(long, default_value = "table1")]
    pub param_set: ParamSet,
    #[arg(long)]
    pub out: PathBuf,
}

/// Hyperparameter overrides on top of the defaults or `--hp-file`.
#[derive(Debug, Clone, Default, Args)]
pub struct HpArgs {
    /// JSON file with hyperparameters (a plain set or a tuner best file).
    #[arg(long)]
    pub hp_file: Option<PathBuf>,
    /// Discount factor.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Actor learning rate.
    #[arg(long)]
    pub a_l: Option<f64>,
    /// Critic learning rate.
    #[arg(long)]
    pub c_l: Option<f64>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch_n: Option<usize>,
    /// Entropy temperature.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Target-critic soft-update rate.
    #[arg(long)]
    pub phi_soft: Option<f64>,
    /// Replay buffer capacity in transitions.
    #[arg(long)]
    pub buffer_capacity: Option<usize>,
    /// Hidden widths, e.g. `128,128`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Factor applied to rewards inside critic targets.
    #[arg(long)]
    pub reward_scale: Option<f64>,
    /// When target critics are updated.
    #[arg(long, value_enum)]
    pub soft_update: Option<SoftUpdateArg>,
    /// Train two critics per agent and use the smaller value.
    #[arg(long)]
    pub twin_critics: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Scenario bundle directory or its manifest.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, value_enum, default_value = "coupled")]
    pub mode: Mode,
    /// Let the agents command storage directly.
    #[arg(long)]
    pub esd_in_action: bool,
    /// Also write the deterministic evaluation trace.
    #[arg(long)]
    pub trace: bool,
    /// Suppress progress lines.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub hp: HpArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scenario bundle directory or its manifest.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory of a `train` run, or its `policy.json`.
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the mode the policy was trained in.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Sample actions instead of using the policy mean.
    #[arg(long)]
    pub stochastic: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario bundle directory or its manifest.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub esd_in_action: bool,
    /// Suppress progress lines.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub hp: HpArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Scenario bundle directory or its manifest.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Training episodes per trial.
    #[arg(long, default_value_t = 300)]
    pub episodes: usize,
    /// Parallel workers for the bootstrap trials.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value = "coupled")]
    pub mode: Mode,
    #[arg(long, default_value_t = 8)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 2000)]
    pub candidates: usize,
    #[arg(long)]
    pub esd_in_action: bool,
    /// Suppress progress lines.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub hp: HpArgs,
}
