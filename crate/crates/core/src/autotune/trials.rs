use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{expected_improvement, gp_fit, lhs_unit, AutotuneError, GpConfig, GpModel, SearchSpace};
use crate::masac::SacHyperparams;
use crate::rng::{derive_seed, stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialPhase {
    Bootstrap,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based.
    pub trial_id: usize,
    pub phase: TrialPhase,
    pub hyperparams: SacHyperparams,
    /// Position in the unit cube the GP sees.
    pub unit: Vec<f64>,
    pub objective: Option<f64>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn completed_objective(&self) -> Option<f64> {
        match self.status {
            TrialStatus::Completed => self.objective,
            TrialStatus::Failed => None,
        }
    }
}

/// Search settings besides the space itself.
#[derive(Debug, Clone)]
pub struct TunerConfig {
    /// LHS points evaluated before the GP takes over.
    pub bootstrap: usize,
    /// Fresh LHS candidates scored per proposal.
    pub n_candidates: usize,
    pub gp: GpConfig,
    /// Parallel workers for the bootstrap trials.
    pub jobs: usize,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig {
            bootstrap: 8,
            n_candidates: 2000,
            gp: GpConfig::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub records: Vec<TrialRecord>,
    /// Index into `records` of the best completed trial.
    pub best: usize,
}

impl TuneOutcome {
    pub fn best_record(&self) -> &TrialRecord {
        &self.records[self.best]
    }

    /// Best completed objective after each trial (failed trials repeat the
    /// previous value; `None` until the first success).
    pub fn best_so_far(&self) -> Vec<Option<f64>> {
        let mut best: Option<f64> = None;
        self.records
            .iter()
            .map(|r| {
                if let Some(v) = r.completed_objective() {
                    best = Some(best.map_or(v, |b| b.max(v)));
                }
                best
            })
            .collect()
    }
}

/// Expected-improvement argmax over `n_candidates` fresh LHS points; ties go
/// to the lowest candidate index. Returns the snapped unit point.
pub fn propose_next(
    model: &GpModel,
    space: &SearchSpace,
    best: f64,
    n_candidates: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream::PROPOSAL);
    let cands = lhs_unit(space.dim(), n_candidates.max(1), &mut rng);
    let mut arg = 0;
    let mut top = f64::NEG_INFINITY;
    for (i, c) in cands.iter().enumerate() {
        let c = space.snap(c);
        let (m, v) = model.predict(&c);
        let ei = expected_improvement(m, v, best);
        if ei > top {
            top = ei;
            arg = i;
        }
    }
    space.snap(&cands[arg])
}

fn evaluate_trial<F>(
    trainer: &F,
    space: &SearchSpace,
    base: &SacHyperparams,
    trial_id: usize,
    phase: TrialPhase,
    unit: Vec<f64>,
    seed: u64,
) -> TrialRecord
where
    F: Fn(&SacHyperparams, u64) -> Result<f64, String> + Sync,
{
    let hp = space.apply(base, &space.decode(&unit));
    let start = Instant::now();
    let result = trainer(&hp, seed).and_then(|v| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite objective {v}"))
        }
    });
    let wall_time_s = start.elapsed().as_secs_f64();
    let (objective, status, error) = match result {
        Ok(v) => (Some(v), TrialStatus::Completed, None),
        Err(e) => (None, TrialStatus::Failed, Some(e)),
    };
    TrialRecord {
        trial_id,
        phase,
        hyperparams: hp,
        unit,
        objective,
        seed,
        wall_time_s,
        status,
        error,
    }
}

/// Seed handed to trial `trial_id` (1-based).
pub fn trial_seed(seed: u64, trial_id: usize) -> u64 {
    derive_seed(derive_seed(seed, stream::TRIAL_SEEDS), trial_id as u64)
}

/// Runs `m` trials: an LHS bootstrap, then GP-guided proposals. The trainer
/// maps a configuration and a seed to an objective to maximize, or an error
/// message for a failed trial. `on_trial` sees each finished record.
pub fn run_trials<F, G>(
    space: &SearchSpace,
    base: &SacHyperparams,
    m: usize,
    trainer: F,
    seed: u64,
    cfg: &TunerConfig,
    mut on_trial: G,
) -> Result<TuneOutcome, AutotuneError>
where
    F: Fn(&SacHyperparams, u64) -> Result<f64, String> + Sync,
    G: FnMut(&TrialRecord),
{
    space.validate()?;
    if m == 0 {
        return Err(AutotuneError::InvalidSpace("need at least one trial".into()));
    }
    let b = m.min(cfg.bootstrap.max(1));
    let design: Vec<Vec<f64>> = lhs_unit(space.dim(), b, &mut stream_rng(seed, stream::LHS))
        .iter()
        .map(|u| space.snap(u))
        .collect();

    let mut records: Vec<TrialRecord> = Vec::with_capacity(m);
    let jobs = cfg.jobs.max(1);
    for chunk in design.chunks(jobs).enumerate().map(|(c, pts)| (c * jobs, pts)) {
        let (offset, pts) = chunk;
        let done: Vec<TrialRecord> = if jobs == 1 {
            pts.iter()
                .enumerate()
                .map(|(k, u)| {
                    let id = offset + k + 1;
                    evaluate_trial(&trainer, space, base, id, TrialPhase::Bootstrap, u.clone(), trial_seed(seed, id))
                })
                .collect()
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = pts
                    .iter()
                    .enumerate()
                    .map(|(k, u)| {
                        let id = offset + k + 1;
                        let trainer = &trainer;
                        s.spawn(move || {
                            evaluate_trial(trainer, space, base, id, TrialPhase::Bootstrap, u.clone(), trial_seed(seed, id))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("trial thread")).collect()
            })
        };
        for r in done {
            on_trial(&r);
            records.push(r);
        }
    }

    while records.len() < m {
        let id = records.len() + 1;
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.completed_objective().is_some()).collect();
        let x: Vec<Vec<f64>> = ok.iter().map(|r| r.unit.clone()).collect();
        let y: Vec<f64> = ok.iter().map(|r| r.objective.unwrap()).collect();
        let unit = match gp_fit(&x, &y, &cfg.gp) {
            Ok(model) => {
                let best = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                propose_next(&model, space, best, cfg.n_candidates, trial_seed(seed, id))
            }
            // Too little usable data for a model: keep exploring at random.
            Err(AutotuneError::InsufficientData { .. } | AutotuneError::DegenerateDesign) => {
                let mut rng = stream_rng(trial_seed(seed, id), stream::PROPOSAL);
                space.snap(&lhs_unit(space.dim(), 1, &mut rng)[0])
            }
            Err(e) => return Err(e),
        };
        let r = evaluate_trial(&trainer, space, base, id, TrialPhase::Model, unit, trial_seed(seed, id));
        on_trial(&r);
        records.push(r);
    }

    let best = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.completed_objective().map(|v| (i, v)))
        .fold(None::<(usize, f64)>, |acc, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
        .ok_or(AutotuneError::AllTrialsFailed { trials: m })?;
    Ok(TuneOutcome { records, best })
}

/// Best configuration as written next to the trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestHyperparams {
    pub trial_id: usize,
    pub objective: f64,
    pub hyperparams: SacHyperparams,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> AutotuneError {
    AutotuneError::Io(format!("{}: {e}", path.display()))
}

pub fn trial_file_name(trial_id: usize) -> String {
    format!("trial_{trial_id:03}.json")
}

pub fn write_trial_json(dir: &Path, r: &TrialRecord) -> Result<(), AutotuneError> {
    let p = dir.join(trial_file_name(r.trial_id));
    let text = serde_json::to_string_pretty(r).map_err(|e| io_err(&p, e))?;
    fs::write(&p, text).map_err(|e| io_err(&p, e))
}

pub fn read_trial_json(path: &Path) -> Result<TrialRecord, AutotuneError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let r: TrialRecord = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    if r.status == TrialStatus::Completed && !r.objective.is_some_and(f64::is_finite) {
        return Err(io_err(path, "completed trial without a finite objective"));
    }
    Ok(r)
}

pub const TRIALS_CSV_HEADER: [&str; 7] = ["trial_id", "gamma", "a_l", "c_l", "batch_n", "kappa", "objective"];

/// Combined log; failed trials have an empty objective.
pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<(), AutotuneError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(TRIALS_CSV_HEADER).map_err(|e| io_err(path, e))?;
    for r in records {
        let h = &r.hyperparams;
        w.write_record([
            r.trial_id.to_string(),
            h.gamma.to_string(),
            h.a_l.to_string(),
            h.c_l.to_string(),
            h.batch_n.to_string(),
            h.kappa.to_string(),
            r.completed_objective().map_or(String::new(), |v| v.to_string()),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// One row of the combined log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial_id: usize,
    pub gamma: f64,
    pub a_l: f64,
    pub c_l: f64,
    pub batch_n: usize,
    pub kappa: f64,
    pub objective: Option<f64>,
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRow>, AutotuneError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != TRIALS_CSV_HEADER {
        return Err(io_err(path, format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let bad = |f: &str| io_err(path, format!("row {}: bad `{f}`", i + 1));
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(TRIALS_CSV_HEADER[k]));
        out.push(TrialRow {
            trial_id: rec[0].parse().map_err(|_| bad("trial_id"))?,
            gamma: num(1)?,
            a_l: num(2)?,
            c_l: num(3)?,
            batch_n: rec[4].parse().map_err(|_| bad("batch_n"))?,
            kappa: num(5)?,
            objective: if rec[6].is_empty() { None } else { Some(num(6)?) },
        });
    }
    Ok(out)
}

pub fn write_best_json(path: &Path, best: &BestHyperparams) -> Result<(), AutotuneError> {
    let text = serde_json::to_string_pretty(best).map_err(|e| io_err(path, e))?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_best_json(path: &Path) -> Result<BestHyperparams, AutotuneError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}
