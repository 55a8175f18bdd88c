use std::fs;
use std::path::{Path, PathBuf};

use mmg_core::autotune::{
    run_trials, write_best_json, write_trial_json, write_trials_csv, BestHyperparams, Domain,
    SearchSpace, TrialStatus, TunerConfig,
};
use mmg_core::domain::{generate_synthetic_with, load_scenario, write_scenario, PriceTiers};
use mmg_core::env::{write_trace, ActionSpace, EnvConfig, OBS_DIM};
use mmg_core::masac::{
    convergence_episode, evaluate, train_with, DecentralizedPolicy, MasacError, MmgTask,
    SacHyperparams, TrainingReport,
};
use mmg_core::neural::Checkpoint;
use mmg_core::Scenario;

use crate::args::{Cli, Command, CompareArgs, EvalArgs, GenDataArgs, HpArgs, Mode, TrainArgs, TuneArgs};
use crate::reports::*;
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(a) => cmd_gen_data(&a).map(|_| ()),
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
        Command::CompareModes(a) => cmd_compare_modes(&a).map(|_| ()),
        Command::Tune(a) => cmd_tune(&a).map(|_| ()),
    }
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<Scenario, CliError> {
    let sc = generate_synthetic_with(a.seed, a.n_mg, a.horizon, a.param_set, PriceTiers::default())?;
    write_scenario(&sc, &a.out)?;
    Ok(sc)
}

/// Defaults, then `--hp-file`, then individual flags. Tuned parameters must
/// stay inside the tuner's search ranges.
pub fn resolve_hyperparams(
    hp: &HpArgs,
    episodes: Option<usize>,
    horizon: usize,
) -> Result<SacHyperparams, CliError> {
    let mut out = match &hp.hp_file {
        None => SacHyperparams::default(),
        Some(p) => {
            let v: serde_json::Value = read_json(p)?;
            let inner = v.get("hyperparams").cloned().unwrap_or(v);
            serde_json::from_value(inner).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = hp.$field.clone() {
                out.$field = v;
            }
        )*};
    }
    set!(gamma, a_l, c_l, batch_n, kappa, phi_soft, buffer_capacity, hidden, reward_scale);
    if let Some(s) = hp.soft_update {
        out.soft_update = s.into();
    }
    if hp.twin_critics {
        out.twin_critics = true;
    }
    if let Some(e) = episodes {
        out.episodes = e;
    }
    out.steps_per_episode = horizon;
    out.validate().map_err(|e| CliError::Config(e.to_string()))?;
    check_ranges(&out)?;
    Ok(out)
}

fn check_ranges(hp: &SacHyperparams) -> Result<(), CliError> {
    let space = SearchSpace::default();
    for (spec, v) in space.params.iter().zip(space.values_of(hp)) {
        let ok = match &spec.domain {
            Domain::Continuous { lo, hi, .. } => v >= *lo && v <= *hi,
            Domain::Discrete { values } => values.contains(&v),
        };
        if !ok {
            return Err(CliError::Config(format!(
                "{} = {v} is outside the search range {:?}",
                spec.param.name(),
                spec.domain
            )));
        }
    }
    Ok(())
}

fn env_config(mode: Mode, esd_in_action: bool) -> EnvConfig {
    EnvConfig {
        trading_enabled: mode.trading_enabled(),
        esd_in_action,
    }
}

fn train_logged(
    sc: &Scenario,
    cfg: EnvConfig,
    hp: &SacHyperparams,
    seed: u64,
    label: &str,
    quiet: bool,
) -> Result<TrainingReport, MasacError> {
    let mut task = MmgTask::new(sc.clone(), cfg)?;
    let mut recent = Vec::new();
    train_with(&mut task, hp, seed, |e| {
        recent.push(e.total_reward);
        if !quiet && (e.episode % 100 == 0 || e.episode == hp.episodes) {
            let w = recent.len().min(50);
            let mean = recent[recent.len() - w..].iter().sum::<f64>() / w as f64;
            eprintln!(
                "{label}episode {}/{}: reward {:.1}, 50-episode mean {:.1}, {:.1}s",
                e.episode, hp.episodes, e.total_reward, mean, e.wall_time_s
            );
        }
    })
}

/// Mean total reward over the last 50 episodes of a training run.
pub fn train_objective(
    sc: &Scenario,
    cfg: EnvConfig,
    hp: &SacHyperparams,
    seed: u64,
) -> Result<f64, MasacError> {
    let mut task = MmgTask::new(sc.clone(), cfg)?;
    Ok(train_with(&mut task, hp, seed, |_| {})?.final_mean(50))
}

fn cost_summary(
    policy: &DecentralizedPolicy,
    sc: &Scenario,
    cfg: EnvConfig,
    deterministic: bool,
    seed: u64,
    trace_path: Option<&Path>,
) -> Result<CostSummary, CliError> {
    let ev = evaluate(policy, sc, cfg, deterministic, seed)?;
    if let Some(p) = trace_path {
        write_trace(p, &ev.trace)?;
    }
    Ok(CostSummary {
        trading_enabled: cfg.trading_enabled,
        deterministic,
        total_cost: ev.total_cost,
        total_reward: ev.total_reward,
        per_mg: ev.cost_per_mg,
    })
}

fn write_training(
    out: &Path,
    sc: &Scenario,
    cfg: EnvConfig,
    report: &TrainingReport,
    trace: bool,
) -> Result<TrainSummary, CliError> {
    let ck_dir = out.join(CHECKPOINT_DIR);
    fs::create_dir_all(&ck_dir).map_err(|e| CliError::io(&ck_dir, e))?;
    report.write_csv(&out.join(REWARDS_FILE))?;
    let mut names = Vec::new();
    for (i, ck) in report.checkpoints().iter().enumerate() {
        let name = format!("{CHECKPOINT_DIR}/agent_{}.json", i + 1);
        ck.save(&out.join(&name))?;
        names.push(name);
    }
    write_json(
        &out.join(POLICY_FILE),
        &PolicyManifest {
            n_agents: report.agents.len(),
            trading_enabled: cfg.trading_enabled,
            esd_in_action: cfg.esd_in_action,
            seed: report.seed,
            checkpoints: names,
            hyperparams: report.hyperparams.clone(),
        },
    )?;
    let trace_path = out.join(TRACE_FILE);
    let evaluation = cost_summary(&report.policy(), sc, cfg, true, 0, trace.then_some(trace_path.as_path()))?;
    let rewards = report.total_rewards();
    let conv = convergence_episode(&rewards, 50, 0.01);
    let first = &rewards[..rewards.len().min(50)];
    let summary = TrainSummary {
        episodes: rewards.len(),
        first_50_mean_reward: first.iter().sum::<f64>() / first.len() as f64,
        final_50_mean_reward: report.final_mean(50),
        convergence_episode: conv,
        convergence_time_s: conv.map(|c| report.episodes[c - 1].wall_time_s),
        wall_time_s: report.wall_time_s,
        evaluation,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

pub fn cmd_train(a: &TrainArgs) -> Result<TrainSummary, CliError> {
    let sc = load_scenario(&a.scenario)?;
    let hp = resolve_hyperparams(&a.hp, a.episodes, sc.horizon_t)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let cfg = env_config(a.mode, a.esd_in_action);
    let report = train_logged(&sc, cfg, &hp, a.seed, "", a.quiet)?;
    write_training(&a.out, &sc, cfg, &report, a.trace)
}

/// Reads a policy manifest and the actors it lists. `path` is either a
/// training output directory or the manifest file inside it.
pub fn load_policy(path: &Path) -> Result<(PolicyManifest, DecentralizedPolicy), CliError> {
    let (dir, file) = if path.is_dir() {
        (path.to_path_buf(), path.join(POLICY_FILE))
    } else {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (dir, path.to_path_buf())
    };
    let manifest: PolicyManifest = read_json(&file)?;
    let cks = manifest
        .checkpoints
        .iter()
        .map(|c| Checkpoint::load(&dir.join(c)))
        .collect::<Result<Vec<_>, _>>()?;
    if cks.len() != manifest.n_agents {
        return Err(CliError::Data(format!(
            "manifest lists {} checkpoints for {} agents",
            cks.len(),
            manifest.n_agents
        )));
    }
    Ok((manifest, DecentralizedPolicy::from_checkpoints(&cks)?))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<CostSummary, CliError> {
    let sc = load_scenario(&a.scenario)?;
    let (manifest, policy) = load_policy(&a.policy)?;
    if policy.n_agents() != sc.n_mg {
        return Err(CliError::Data(format!(
            "policy has {} agents but the scenario has {} microgrids",
            policy.n_agents(),
            sc.n_mg
        )));
    }
    for i in 0..sc.n_mg {
        let actor = policy.actor(i);
        let act = ActionSpace::new(&sc, i, manifest.esd_in_action).dim();
        if actor.input_dim() != OBS_DIM || actor.output_dim() != 2 * act {
            return Err(CliError::Data(format!(
                "checkpoint for agent {} expects {} inputs and {} outputs, scenario needs {OBS_DIM} and {}",
                i + 1,
                actor.input_dim(),
                actor.output_dim(),
                2 * act
            )));
        }
    }
    let mode = a.mode.unwrap_or(if manifest.trading_enabled { Mode::Coupled } else { Mode::Isolated });
    let cfg = env_config(mode, manifest.esd_in_action);
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let summary = cost_summary(&policy, &sc, cfg, !a.stochastic, a.seed, Some(&a.out.join(TRACE_FILE)))?;
    write_json(&a.out.join(COST_FILE), &summary)?;
    Ok(summary)
}

fn mode_row(model: &str, s: &CostSummary, reference: Option<f64>) -> ModeRow {
    let sum = |f: fn(&mmg_core::CostBreakdown) -> f64| s.per_mg.iter().map(f).sum::<f64>();
    ModeRow {
        model: model.to_string(),
        trading_enabled: s.trading_enabled,
        total_cost: s.total_cost,
        mgts_cost: sum(|c| c.mgts_cost),
        mg_trade_cost: sum(|c| c.mg_trade_cost),
        grid_trade_cost: sum(|c| c.grid_trade_cost),
        esd_om_cost: sum(|c| c.esd_om_cost),
        loss_cost: sum(|c| c.loss_cost),
        imbalance_penalty: sum(|c| c.imbalance_penalty),
        reduction_pct: reference.map_or(0.0, |r| 100.0 * (r - s.total_cost) / r.abs()),
    }
}

pub fn cmd_compare_modes(a: &CompareArgs) -> Result<Vec<ModeRow>, CliError> {
    let sc = load_scenario(&a.scenario)?;
    let hp = resolve_hyperparams(&a.hp, a.episodes, sc.horizon_t)?;
    let mut rows: Vec<ModeRow> = Vec::new();
    for (k, mode) in [Mode::Isolated, Mode::Coupled].into_iter().enumerate() {
        let name = format!("Model {}", k + 1);
        let dir: PathBuf = a.out.join(format!("model_{}", k + 1));
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let cfg = env_config(mode, a.esd_in_action);
        let report = train_logged(&sc, cfg, &hp, a.seed, &format!("[{name}] "), a.quiet)?;
        let summary = write_training(&dir, &sc, cfg, &report, true)?;
        let reference = rows.first().map(|r| r.total_cost);
        rows.push(mode_row(&name, &summary.evaluation, reference));
    }
    write_modes_csv(&a.out.join(MODES_FILE), &rows)?;
    if !a.quiet {
        for r in &rows {
            eprintln!("{}: total cost {:.2} ({:+.2}%)", r.model, r.total_cost, -r.reduction_pct);
        }
    }
    Ok(rows)
}

pub fn cmd_tune(a: &TuneArgs) -> Result<BestHyperparams, CliError> {
    let sc = load_scenario(&a.scenario)?;
    let base = resolve_hyperparams(&a.hp, Some(a.episodes), sc.horizon_t)?;
    let cfg = env_config(a.mode, a.esd_in_action);
    let trials_dir = a.out.join(TRIALS_DIR);
    fs::create_dir_all(&trials_dir).map_err(|e| CliError::io(&trials_dir, e))?;
    let tuner = TunerConfig {
        bootstrap: a.bootstrap,
        n_candidates: a.candidates,
        jobs: a.jobs,
        ..TunerConfig::default()
    };
    let trainer = |hp: &SacHyperparams, seed: u64| train_objective(&sc, cfg, hp, seed).map_err(|e| e.to_string());
    let mut write_err: Option<CliError> = None;
    let outcome = run_trials(&SearchSpace::default(), &base, a.trials, trainer, a.seed, &tuner, |r| {
        if let Err(e) = write_trial_json(&trials_dir, r) {
            write_err.get_or_insert(e.into());
        }
        if !a.quiet {
            match r.status {
                TrialStatus::Completed => eprintln!(
                    "trial {}: objective {:.1} ({:.1}s)",
                    r.trial_id,
                    r.objective.unwrap_or(f64::NAN),
                    r.wall_time_s
                ),
                TrialStatus::Failed => eprintln!("trial {}: failed: {}", r.trial_id, r.error.as_deref().unwrap_or("")),
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    write_trials_csv(&a.out.join(TRIALS_CSV), &outcome.records)?;
    let b = outcome.best_record();
    let best = BestHyperparams {
        trial_id: b.trial_id,
        objective: b.objective.expect("best trial completed"),
        hyperparams: b.hyperparams.clone(),
    };
    write_best_json(&a.out.join(BEST_FILE), &best)?;
    Ok(best)
}
