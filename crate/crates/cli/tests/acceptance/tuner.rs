//! Latin-hypercube stratification, GP interpolation and search on a known
//! concave objective.

use mmg_core::autotune::{gp_fit, lhs_sample, lhs_unit, run_trials, GpConfig, SearchSpace, TunerConfig};
use mmg_core::masac::SacHyperparams;
use mmg_core::rng::stream_rng;
use rand::Rng;

use crate::common::ok;
use crate::Outcome;

const U_STAR: [f64; 5] = [0.7, 0.35, 0.6, 0.75, 0.4];
const OPTIMUM: f64 = -100.0;

fn stratified(points: &[Vec<f64>], dim: usize) -> bool {
    let n = points.len();
    (0..dim).all(|d| {
        let mut seen = vec![false; n];
        points.iter().all(|p| {
            let k = (p[d] * n as f64).floor() as usize;
            k < n && !std::mem::replace(&mut seen[k], true)
        })
    })
}

fn lhs() -> Result<usize, String> {
    let mut checked = 0;
    for (seed, (dim, n)) in [(1, 1), (5, 1), (5, 8), (5, 30), (3, 100), (7, 13)].into_iter().enumerate() {
        let mut rng = stream_rng(seed as u64, 400);
        if !stratified(&lhs_unit(dim, n, &mut rng), dim) {
            return Err(format!("unit design {dim}x{n} is not stratified"));
        }
        checked += 1;
    }
    // Decoded designs keep one point per stratum in every continuous
    // dimension once mapped back to the unit interval.
    let space = SearchSpace::default();
    let design = lhs_sample(&space, 8, 3);
    for d in (0..space.dim()).filter(|&d| d != 3) {
        let col: Vec<Vec<f64>> = design.iter().map(|v| vec![space.encode(v)[d]]).collect();
        if !stratified(&col, 1) {
            return Err(format!("search-space dimension {d} is not stratified"));
        }
    }
    Ok(checked)
}

fn interpolation() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = stream_rng(seed, 401);
        let x = lhs_unit(5, 12, &mut rng);
        let y: Vec<f64> = x.iter().map(|p| p.iter().map(|v| (3.0 * v).sin()).sum::<f64>() + rng.random::<f64>()).collect();
        let gp = ok(gp_fit(&x, &y, &GpConfig::interpolating()), "gp fit")?;
        for (p, &v) in x.iter().zip(&y) {
            let (mean, _) = gp.predict(p);
            worst = worst.max((mean - v).abs());
        }
    }
    if worst <= 1e-6 {
        Ok(worst)
    } else {
        Err(format!("GP misses a training point by {worst:e}"))
    }
}

fn search() -> Result<(usize, f64), String> {
    let space = SearchSpace::default();
    let base = SacHyperparams::default();
    let objective = |hp: &SacHyperparams, _: u64| {
        let u = space.locate(hp);
        Ok(OPTIMUM * (1.0 + u.iter().zip(U_STAR).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
    };
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 1..=10 {
        let out = ok(run_trials(&space, &base, 30, objective, seed, &TunerConfig::default(), |_| {}), "run_trials")?;
        let best = out.records[out.best].objective.unwrap_or(f64::NEG_INFINITY);
        let gap = (best - OPTIMUM).abs() / OPTIMUM.abs();
        worst = worst.max(gap);
        if gap <= 0.05 {
            hits += 1;
        }
    }
    if hits >= 8 {
        Ok((hits, worst))
    } else {
        Err(format!("only {hits}/10 seeds within 5% of the optimum in 30 trials"))
    }
}

pub fn check() -> Outcome {
    let designs = lhs()?;
    let interp = interpolation()?;
    let (hits, worst) = search()?;
    Ok(format!(
        "{designs} LHS designs stratified; GP interpolation error {interp:.1e}; \
         {hits}/10 seeds within 5% of the optimum in 30 trials (worst {:.2}%)",
        100.0 * worst
    ))
}
