//! The full command pipeline from an empty directory. Every emitted file is
//! loaded and written back; the rewrite must match byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mmg_cli::reports::{
    read_json, read_modes_csv, write_json, write_modes_csv, CostSummary, PolicyManifest, TrainSummary,
};
use mmg_core::autotune::{
    read_best_json, read_trial_json, read_trials_csv, write_best_json, write_trial_json, write_trials_csv,
};
use mmg_core::domain::{load_scenario, write_scenario};
use mmg_core::env::{read_trace, write_trace};
use mmg_core::masac::{read_rewards_csv, write_rewards_csv};
use mmg_core::neural::Checkpoint;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::common::{ensure, ok};
use crate::Outcome;

fn mmg(args: &[&str]) -> Result<(), String> {
    let out = ok(Command::new(env!("CARGO_BIN_EXE_mmg")).args(args).output(), "spawn mmg")?;
    ensure(out.status.success(), || {
        format!("mmg {} failed: {}", args[0], String::from_utf8_lossy(&out.stderr))
    })
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

struct Files {
    scratch: PathBuf,
    count: usize,
}

impl Files {
    fn same(&mut self, original: &Path, rewrite: impl FnOnce(&Path) -> Result<(), String>) -> Result<(), String> {
        let copy = self.scratch.join(format!("copy_{}", self.count));
        self.count += 1;
        rewrite(&copy)?;
        let a = ok(fs::read(original), "read original")?;
        let b = ok(fs::read(&copy), "read rewrite")?;
        ensure(a == b, || format!("{} does not round-trip", original.display()))
    }

    fn json<T: Serialize + DeserializeOwned>(&mut self, path: &Path) -> Result<T, String> {
        let v: T = ok(read_json(path), "load json")?;
        self.same(path, |c| ok(write_json(c, &v), "write json"))?;
        Ok(v)
    }

    fn training_dir(&mut self, dir: &Path) -> Result<(), String> {
        let manifest: PolicyManifest = self.json(&dir.join("policy.json"))?;
        for ck in &manifest.checkpoints {
            let path = dir.join(ck);
            let c = ok(Checkpoint::load(&path), "load checkpoint")?;
            self.same(&path, |copy| ok(c.save(copy), "save checkpoint"))?;
        }
        let rewards = dir.join("rewards.csv");
        let rows = ok(read_rewards_csv(&rewards), "load rewards")?;
        self.same(&rewards, |c| ok(write_rewards_csv(c, &rows), "write rewards"))?;
        let _: TrainSummary = self.json(&dir.join("summary.json"))?;
        Ok(())
    }

    fn trace(&mut self, path: &Path) -> Result<(), String> {
        let rows = ok(read_trace(path), "load trace")?;
        self.same(path, |c| ok(write_trace(c, &rows), "write trace"))
    }
}

pub fn check() -> Outcome {
    let tmp = ok(tempfile::tempdir(), "tempdir")?;
    let root = tmp.path();
    let (sc, tune, run, ev, cmp) = (root.join("sc"), root.join("tune"), root.join("run"), root.join("ev"), root.join("cmp"));
    let best = tune.join("best_hyperparams.json");

    mmg(&["gen-data", "--out", p(&sc)])?;
    mmg(&["tune", "--scenario", p(&sc), "--out", p(&tune), "--trials", "3", "--episodes", "50"])?;
    mmg(&["train", "--scenario", p(&sc), "--out", p(&run), "--hp-file", p(&best), "--trace", "--quiet"])?;
    mmg(&["eval", "--scenario", p(&sc), "--policy", p(&run), "--out", p(&ev)])?;
    mmg(&["compare-modes", "--scenario", p(&sc), "--out", p(&cmp), "--hp-file", p(&best), "--quiet"])?;

    let scratch = root.join("scratch");
    ok(fs::create_dir(&scratch), "scratch dir")?;
    let mut files = Files { scratch: scratch.clone(), count: 0 };

    let scenario = ok(load_scenario(&sc), "load scenario")?;
    let sc2 = scratch.join("sc");
    ok(write_scenario(&scenario, &sc2), "write scenario")?;
    for f in ["scenario.toml", "prices.csv", "mg_1.csv", "mg_2.csv"] {
        files.same(&sc.join(f), |c| ok(fs::copy(sc2.join(f), c).map(|_| ()), "copy"))?;
    }

    let mut records = Vec::new();
    for id in 1..=3 {
        let path = tune.join("trials").join(format!("trial_{id:03}.json"));
        let r = ok(read_trial_json(&path), "load trial")?;
        files.same(&path, |c| {
            let dir = c.with_extension("d");
            fs::create_dir(&dir).map_err(|e| e.to_string())?;
            ok(write_trial_json(&dir, &r), "write trial")?;
            ok(fs::copy(dir.join(path.file_name().unwrap()), c).map(|_| ()), "copy")
        })?;
        records.push(r);
    }
    let trials_csv = tune.join("trials.csv");
    let rows = ok(read_trials_csv(&trials_csv), "load trials csv")?;
    ensure(rows.len() == 3, || format!("{} trial rows", rows.len()))?;
    files.same(&trials_csv, |c| ok(write_trials_csv(c, &records), "write trials csv"))?;
    let b = ok(read_best_json(&best), "load best")?;
    files.same(&best, |c| ok(write_best_json(c, &b), "write best"))?;

    files.training_dir(&run)?;
    files.trace(&run.join("trace.csv"))?;
    let _: CostSummary = files.json(&ev.join("cost_summary.json"))?;
    files.trace(&ev.join("trace.csv"))?;
    for m in ["model_1", "model_2"] {
        files.training_dir(&cmp.join(m))?;
    }
    let modes = cmp.join("modes.csv");
    let rows = ok(read_modes_csv(&modes), "load modes")?;
    files.same(&modes, |c| ok(write_modes_csv(c, &rows), "write modes"))?;

    Ok(format!("5 commands ran; {} files round-tripped", files.count))
}
