//! Report files written by the commands, with their loaders.

use std::fs;
use std::path::Path;

use mmg_core::masac::SacHyperparams;
use mmg_core::CostBreakdown;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const POLICY_FILE: &str = "policy.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REWARDS_FILE: &str = "rewards.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const COST_FILE: &str = "cost_summary.json";
pub const MODES_FILE: &str = "modes.csv";
pub const TRIALS_DIR: &str = "trials";
pub const TRIALS_CSV: &str = "trials.csv";
pub const BEST_FILE: &str = "best_hyperparams.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Index of a trained policy: which checkpoints belong to it and how it was
/// trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyManifest {
    pub n_agents: usize,
    pub trading_enabled: bool,
    pub esd_in_action: bool,
    pub seed: u64,
    /// Paths relative to the manifest.
    pub checkpoints: Vec<String>,
    pub hyperparams: SacHyperparams,
}

/// Episode costs per microgrid and in total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub trading_enabled: bool,
    pub deterministic: bool,
    pub total_cost: f64,
    pub total_reward: f64,
    pub per_mg: Vec<CostBreakdown>,
}

/// Training outcome in the shape of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub episodes: usize,
    pub first_50_mean_reward: f64,
    pub final_50_mean_reward: f64,
    /// First episode after which the 50-episode moving mean stays within 1%
    /// of its final value.
    pub convergence_episode: Option<usize>,
    /// Wall time when the convergence episode finished.
    pub convergence_time_s: Option<f64>,
    pub wall_time_s: f64,
    pub evaluation: CostSummary,
}

/// One row of the mode comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub model: String,
    pub trading_enabled: bool,
    pub total_cost: f64,
    pub mgts_cost: f64,
    pub mg_trade_cost: f64,
    pub grid_trade_cost: f64,
    pub esd_om_cost: f64,
    pub loss_cost: f64,
    pub imbalance_penalty: f64,
    /// Cost reduction relative to Model 1, in percent.
    pub reduction_pct: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_modes_csv(path: &Path, rows: &[ModeRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_modes_csv(path: &Path) -> Result<Vec<ModeRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<ModeRow>, _>>()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
