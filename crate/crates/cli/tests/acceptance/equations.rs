//! Closed-form terms against hand-worked values.

use mmg_core::autotune::bootstrap_count;
use mmg_core::domain::MicrogridParams;
use mmg_core::env::{
    esd_om_cost, esd_step, grid_trade_cost, imbalance_penalty, loss_cost, mg_trade_cost, mgts_cost, power_consumption,
    power_gap, power_loss, power_supply, step_reward, AgentAction, EnvConfig, MmgEnv, StorageState,
};
use mmg_core::neural::Mlp;
use mmg_core::{CostBreakdown, Scenario};
use nalgebra::{DMatrix, DVector};

use crate::common::{near, ok};
use crate::Outcome;

const TOL: f64 = 1e-9;

pub fn check() -> Outcome {
    let mut n = 0;
    let mut eq = |what: &str, a: f64, b: f64| {
        n += 1;
        near(what, a, b, TOL)
    };
    let p1 = MicrogridParams::table1(0);
    let p2 = MicrogridParams::table1(1);

    eq("turbine 1.3·30", ok(mgts_cost(&p1, 30.0), "mgts")?, 39.0)?;
    eq("turbine 1.5·5", ok(mgts_cost(&p2, 5.0), "mgts")?, 7.5)?;

    let s = |v| StorageState { s_esd: v };
    eq("charge 100 + 0.9·50", ok(esd_step(s(100.0), 50.0, 0.0, &p1, 1.0), "esd")?.s_esd, 145.0)?;
    eq("discharge 100 − 45/0.9", ok(esd_step(s(100.0), 0.0, 45.0, &p1, 1.0), "esd")?.s_esd, 50.0)?;
    eq("storage o&m 0.5·50", esd_om_cost(50.0, 0.0, &p1), 25.0)?;
    eq("storage o&m 0.5·100", esd_om_cost(0.0, 100.0, &p1), 50.0)?;

    eq("mg purchase 0.8·100", mg_trade_cost(0.8, &[0.0, 100.0]), 80.0)?;
    eq("mg sale 0.8·−50", mg_trade_cost(0.8, &[-50.0, 0.0]), -40.0)?;
    eq("grid purchase 1.0·200", ok(grid_trade_cost(1.0, 0.3, 200.0, 500.0), "grid")?, 200.0)?;
    eq("grid sale 0.3·−100", ok(grid_trade_cost(1.0, 0.3, -100.0, 500.0), "grid")?, -30.0)?;

    eq("loss 0.02·(30+50+100)", power_loss(&p1, 30.0, 50.0, 100.0), 3.6)?;
    eq("loss cost 1.35·3.6", loss_cost(&p1, 3.6), 4.86)?;
    eq("gap 500 − 480", power_gap(500.0, 480.0), 20.0)?;
    eq("supply", power_supply(30.0, 100.0, 50.0, 10.0, 20.0, 30.0), 240.0)?;
    eq("consumption", power_consumption(226.4, 10.0, 3.6), 240.0)?;
    eq("penalty 0.5·10²", imbalance_penalty(&p1, 10.0), 50.0)?;
    let c = CostBreakdown::new(26.0, 64.0, 150.0, 9.1, 2.43, 0.0);
    eq("reward", step_reward(&c), -251.53)?;

    // Full step: MG1 buys 100 and MG2 sells 80, so 80 clears. MG1 loss 1.8,
    // residual 18.2 goes into storage; MG2 loss 4.8, residual −44.8 with an
    // empty store is all gap.
    let sc = Scenario {
        n_mg: 2,
        horizon_t: 2,
        dt: 1.0,
        load: vec![vec![300.0; 2], vec![100.0; 2]],
        p_wt: vec![vec![50.0; 2], vec![150.0; 2]],
        p_pv: vec![vec![20.0; 2], vec![80.0; 2]],
        price_mg: vec![0.8; 2],
        price_grid_buy: vec![1.0; 2],
        price_grid_sell: vec![0.3; 2],
        params: vec![p1.clone(), p2.clone()],
    };
    let acts = vec![
        AgentAction { p_mgts: 20.0, p_ij: vec![0.0, 100.0], p_ig: 150.0, esd: None },
        AgentAction { p_mgts: 10.0, p_ij: vec![-80.0, 0.0], p_ig: -100.0, esd: None },
    ];
    let mut env = ok(MmgEnv::new(sc, EnvConfig::default()), "env")?;
    env.reset();
    let r = ok(env.step(&acts), "step")?;
    eq("realized trade", r.realized_trade[0][1], 80.0)?;
    eq("mg1 charge", r.esd_charge[0], 18.2)?;
    eq("mg1 storage", r.s_esd[0], 16.38)?;
    eq("mg1 total", r.cost[0].total, 251.53)?;
    eq("mg2 penalty", r.cost[1].imbalance_penalty, 1003.52)?;
    eq("mg2 total", r.cost[1].total, 931.0)?;
    eq("mg2 reward", r.reward[1], -931.0)?;
    // Terminal step empties MG1's 16.38 kWh: 14.742 kW discharge on top of
    // the 18.2 surplus.
    let r = ok(env.step(&acts), "terminal step")?;
    eq("terminal discharge", r.esd_discharge[0], 14.742)?;
    eq("terminal gap", r.p_gap[0], 32.942)?;
    eq("terminal total", r.cost[0].total, 792.388682)?;

    let mut target = ok(
        Mlp::from_parts(vec![DMatrix::from_row_slice(1, 2, &[-1.0, 4.0])], vec![DVector::from_element(1, 0.0)]),
        "net",
    )?;
    let source = ok(
        Mlp::from_parts(vec![DMatrix::from_row_slice(1, 2, &[2.0, 4.0])], vec![DVector::from_element(1, 1.0)]),
        "net",
    )?;
    target.blend_from(&source, 0.1);
    let blended = target.params_flat();
    eq("soft update 0.1·2 + 0.9·−1", blended[0], -0.7)?;
    eq("soft update fixed point", blended[1], 4.0)?;
    eq("soft update 0.1·1", blended[2], 0.1)?;

    let counts = [(3, 2, 6u128), (3, 3, 36), (4, 5, 331_776), (8, 5, 40320u128.pow(4)), (1, 5, 1), (5, 1, 1)];
    for (d, u, want) in counts {
        n += 1;
        if bootstrap_count(d, u) != want {
            return Err(format!("bootstrap count ({d}!)^({u}−1) = {} not {want}", bootstrap_count(d, u)));
        }
    }
    Ok(format!("{n} values within {TOL:e}"))
}
