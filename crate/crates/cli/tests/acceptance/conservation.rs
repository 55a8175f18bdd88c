//! Physical and accounting invariants under uniformly random actions.

use mmg_core::domain::{generate_synthetic_with, ParamSet, PriceTiers};
use mmg_core::env::{episode_objective, trace_rows, EnvConfig, MmgEnv};
use mmg_core::rng::stream_rng;
use rand::Rng;

use crate::common::{ensure, near, ok};
use crate::Outcome;

const STEPS: usize = 10_000;

pub fn check() -> Outcome {
    let mut rng = stream_rng(2024, 0);
    let mut steps = 0;
    let mut episodes = 0;
    while steps < STEPS {
        let n = rng.random_range(2..=4);
        let horizon = rng.random_range(1..=48);
        let set = if rng.random_bool(0.5) { ParamSet::Table1 } else { ParamSet::Table2 };
        let sc = ok(generate_synthetic_with(rng.random(), n, horizon, set, PriceTiers::default()), "scenario")?;
        let cfg = EnvConfig { trading_enabled: rng.random_bool(0.5), esd_in_action: rng.random_bool(0.3) };
        let mut env = ok(MmgEnv::new(sc.clone(), cfg), "env")?;
        env.reset();
        let mut rows = Vec::new();
        let mut total = 0.0;
        loop {
            let acts: Vec<_> = (0..n)
                .map(|i| {
                    let s = env.action_space(i);
                    let u: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
                    s.scale(&u)
                })
                .collect();
            let r = ok(env.step(&acts), "step")?;
            steps += 1;
            for i in 0..n {
                let p = &sc.params[i];
                for j in 0..n {
                    ensure(r.realized_trade[i][j] + r.realized_trade[j][i] == 0.0, || {
                        format!("trade ({i},{j}) not antisymmetric at step {steps}")
                    })?;
                    ensure(cfg.trading_enabled || r.realized_trade[i][j] == 0.0, || "isolated mode traded".into())?;
                }
                ensure(r.s_esd[i] >= p.s_esd_min && r.s_esd[i] <= p.s_esd_max, || {
                    format!("storage {} outside [{}, {}]", r.s_esd[i], p.s_esd_min, p.s_esd_max)
                })?;
                ensure(r.esd_charge[i] * r.esd_discharge[i] == 0.0, || {
                    format!("simultaneous charge {} and discharge {}", r.esd_charge[i], r.esd_discharge[i])
                })?;
                ensure(r.reward[i] == -r.cost[i].total, || format!("reward {} vs cost {}", r.reward[i], r.cost[i].total))?;
                total += r.cost[i].total;
            }
            rows.extend(trace_rows(&r, &sc));
            if r.done {
                break;
            }
        }
        for row in &rows {
            near("balance", row.balance_residual(), row.p_gap_kw, 1e-9)?;
        }
        near("episode objective", episode_objective(&rows, &sc), total, 1e-9)?;
        episodes += 1;
    }
    Ok(format!("{steps} steps over {episodes} random episodes"))
}
