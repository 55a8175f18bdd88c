//! Per-(t, MG) trace rows, their CSV form, and the episode objective
//! recomputed from realized quantities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EnvError, StepResult};
use crate::domain::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    /// 1-based microgrid number.
    pub mg: usize,
    pub load_kw: f64,
    pub wt_kw: f64,
    pub pv_kw: f64,
    pub p_mgts_kw: f64,
    /// Net realized inter-MG trade, positive = bought.
    pub p_trade_kw: f64,
    pub p_grid_kw: f64,
    pub p_ch_kw: f64,
    pub p_dc_kw: f64,
    pub p_loss_kw: f64,
    pub terminal_shortfall_kw: f64,
    pub p_gap_kw: f64,
    /// State of charge after the step.
    pub soc: f64,
    pub price_mg: f64,
    pub price_grid_buy: f64,
    pub price_grid_sell: f64,
    pub mgts_cost: f64,
    pub mg_trade_cost: f64,
    pub grid_trade_cost: f64,
    pub esd_om_cost: f64,
    pub loss_cost: f64,
    pub imbalance_penalty: f64,
    pub total_cost: f64,
    pub reward: f64,
}

impl TraceRow {
    /// Supply minus consumption recomputed from the row's own columns.
    pub fn balance_residual(&self) -> f64 {
        self.p_mgts_kw + self.wt_kw + self.pv_kw + self.p_dc_kw + self.p_trade_kw + self.p_grid_kw
            - self.load_kw
            - self.p_ch_kw
            - self.p_loss_kw
            - self.terminal_shortfall_kw
    }
}

/// Flattens one step into rows, one per microgrid.
pub fn trace_rows(step: &StepResult, scenario: &Scenario) -> Vec<TraceRow> {
    let t = step.t;
    (0..scenario.n_mg)
        .map(|i| {
            let c = &step.cost[i];
            TraceRow {
                t,
                mg: i + 1,
                load_kw: scenario.load[i][t],
                wt_kw: scenario.p_wt[i][t],
                pv_kw: scenario.p_pv[i][t],
                p_mgts_kw: step.p_mgts[i],
                p_trade_kw: step.realized_trade[i].iter().sum(),
                p_grid_kw: step.realized_grid[i],
                p_ch_kw: step.esd_charge[i],
                p_dc_kw: step.esd_discharge[i],
                p_loss_kw: step.p_loss[i],
                terminal_shortfall_kw: step.terminal_shortfall[i],
                p_gap_kw: step.p_gap[i],
                soc: step.s_esd[i] / scenario.params[i].s_esd_max,
                price_mg: scenario.price_mg[t],
                price_grid_buy: scenario.price_grid_buy[t],
                price_grid_sell: scenario.price_grid_sell[t],
                mgts_cost: c.mgts_cost,
                mg_trade_cost: c.mg_trade_cost,
                grid_trade_cost: c.grid_trade_cost,
                esd_om_cost: c.esd_om_cost,
                loss_cost: c.loss_cost,
                imbalance_penalty: c.imbalance_penalty,
                total_cost: c.total,
                reward: step.reward[i],
            }
        })
        .collect()
}

/// Operating-cost objective of a whole trace, evaluated term by term from
/// realized powers, prices and the scenario's coefficients (independent of
/// the cost columns stored in the rows).
pub fn episode_objective(rows: &[TraceRow], scenario: &Scenario) -> f64 {
    rows.iter()
        .map(|r| {
            let p = &scenario.params[r.mg - 1];
            let grid_price = if r.p_grid_kw >= 0.0 {
                r.price_grid_buy
            } else {
                r.price_grid_sell
            };
            p.lambda_mgts * r.p_mgts_kw
                + r.price_mg * r.p_trade_kw
                + grid_price * r.p_grid_kw
                + p.lambda_b * (r.p_ch_kw + r.p_dc_kw)
                + p.lambda_loss * r.p_loss_kw
                + p.ell * r.p_gap_kw * r.p_gap_kw
        })
        .sum()
}

pub fn write_trace(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<(), EnvError> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| EnvError::Trace(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| EnvError::Trace(e.to_string()))?;
    }
    w.flush().map_err(|e| EnvError::Trace(e.to_string()))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>, EnvError> {
    let mut r = csv::Reader::from_path(path.as_ref()).map_err(|e| EnvError::Trace(e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| EnvError::Trace(e.to_string())))
        .collect()
}
