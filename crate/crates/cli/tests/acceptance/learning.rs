//! Training-based criteria. The two mode runs are shared between the mode
//! comparison, the convergence check and the determinism check.

use std::path::Path;
use std::sync::OnceLock;

use mmg_core::domain::reference_scenario;
use mmg_core::env::EnvConfig;
use mmg_core::masac::{
    evaluate, moving_mean, train, train_mmg, write_rewards_csv, Evaluation, SacHyperparams, ToyEnv, TrainingReport,
};

use crate::common::ok;
use crate::Outcome;

const SEED: u64 = 1;
const EPISODES: usize = 1000;
const MIN_REDUCTION_PCT: f64 = 3.0;

fn toy_hp() -> SacHyperparams {
    SacHyperparams {
        gamma: 0.9,
        a_l: 1e-3,
        c_l: 3e-3,
        batch_n: 64,
        kappa: 0.001,
        phi_soft: 0.05,
        buffer_capacity: 2000,
        episodes: 3000,
        steps_per_episode: 1,
        hidden: vec![32, 32],
        reward_scale: 1.0,
        ..SacHyperparams::default()
    }
}

pub fn toy() -> Outcome {
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 1..=10 {
        let report = ok(train(&mut ToyEnv::new(2), &toy_hp(), seed), "toy training")?;
        let policy = report.policy();
        let err = (0..2)
            .map(|i| policy.act(i, &[1.0], None).map(|a| (a[0] - 0.5).abs()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err < 0.05 {
            hits += 1;
        }
    }
    if hits >= 9 {
        Ok(format!("{hits}/10 seeds within 0.05 of 0.5 (worst {worst:.3})"))
    } else {
        Err(format!("only {hits}/10 seeds within 0.05 of 0.5 (worst {worst:.3})"))
    }
}

fn mmg_hp() -> SacHyperparams {
    SacHyperparams { episodes: EPISODES, steps_per_episode: 24, ..SacHyperparams::default() }
}

struct Run {
    report: TrainingReport,
    eval: Evaluation,
}

fn run(trading: bool, seed: u64) -> Result<Run, String> {
    let sc = ok(reference_scenario(), "reference scenario")?;
    let cfg = EnvConfig { trading_enabled: trading, ..EnvConfig::default() };
    let report = ok(train_mmg(&sc, cfg, &mmg_hp(), seed), "training")?;
    let eval = ok(evaluate(&report.policy(), &sc, cfg, true, 0), "evaluation")?;
    Ok(Run { report, eval })
}

struct ModeRuns {
    isolated: Run,
    coupled: Run,
}

fn mode_runs() -> Result<&'static ModeRuns, String> {
    static RUNS: OnceLock<Result<ModeRuns, String>> = OnceLock::new();
    RUNS.get_or_init(|| {
        Ok(ModeRuns {
            isolated: run(false, SEED)?,
            coupled: run(true, SEED)?,
        })
    })
    .as_ref()
    .map_err(Clone::clone)
}

pub fn modes() -> Outcome {
    let r = mode_runs()?;
    let (c1, c2) = (r.isolated.eval.total_cost, r.coupled.eval.total_cost);
    let reduction = 100.0 * (c1 - c2) / c1;
    let train_s = r.isolated.report.wall_time_s + r.coupled.report.wall_time_s;
    let msg = format!("isolated {c1:.1}, coupled {c2:.1}, reduction {reduction:.2}% (training {train_s:.0} s)");
    if reduction >= MIN_REDUCTION_PCT && train_s < 1200.0 {
        Ok(msg)
    } else {
        Err(format!("{msg}; need at least {MIN_REDUCTION_PCT}% within 1200 s"))
    }
}

/// Moving mean at the last episode above the one at episode 50, and the
/// last-100 standard deviation below 20% of that gain.
fn shape(report: &TrainingReport) -> Result<String, String> {
    let rewards = report.total_rewards();
    let mm = moving_mean(&rewards, 50);
    let (start, end) = (mm[49], mm[mm.len() - 1]);
    let tail = &rewards[rewards.len() - 100..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let sd = (tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / tail.len() as f64).sqrt();
    let gain = end - start;
    let msg = format!("moving mean {start:.0} -> {end:.0}, last-100 sd {sd:.0} ({:.2}% of gain)", 100.0 * sd / gain);
    if gain > 0.0 && sd < 0.2 * gain {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn convergence() -> Outcome {
    let r = mode_runs()?;
    let iso = shape(&r.isolated.report).map_err(|e| format!("isolated: {e}"))?;
    let cpl = shape(&r.coupled.report).map_err(|e| format!("coupled: {e}"))?;
    Ok(format!("isolated: {iso}; coupled: {cpl}"))
}

/// The rewards CSV without its wall-time column.
fn reward_curve(report: &TrainingReport, dir: &Path, name: &str) -> Result<String, String> {
    let path = dir.join(name);
    ok(write_rewards_csv(&path, &report.episodes), "rewards csv")?;
    let text = ok(std::fs::read_to_string(&path), "rewards csv")?;
    Ok(text
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(2);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

pub fn determinism() -> Outcome {
    let dir = ok(tempfile::tempdir(), "tempdir")?;
    let first = &mode_runs()?.coupled;
    let again = run(true, SEED)?;
    let a = reward_curve(&first.report, dir.path(), "a.csv")?;
    let b = reward_curve(&again.report, dir.path(), "b.csv")?;
    if a != b {
        return Err(format!("seed {SEED} reward curves differ"));
    }
    if first.eval.trace != again.eval.trace {
        return Err(format!("seed {SEED} evaluation traces differ"));
    }

    let mut times = vec![first.report.wall_time_s];
    for seed in SEED + 1..SEED + 5 {
        let r = run(true, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        times.push(r.report.wall_time_s);
    }
    let (lo, hi) = times.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let msg = format!(
        "identical curves for seed {SEED}; 5 seeds trained without divergence, wall times {lo:.0}-{hi:.0} s (spread {:.2}x)",
        hi / lo
    );
    if hi < 2.0 * lo {
        Ok(msg)
    } else {
        Err(msg)
    }
}
