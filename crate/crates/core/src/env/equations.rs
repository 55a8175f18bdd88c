//! Closed-form cost and power terms of one microgrid at one step.

use super::EnvError;
use crate::domain::{CostBreakdown, MicrogridParams};

/// Gas turbine operating cost, λ_MGTS · P_MGTS.
pub fn mgts_cost(params: &MicrogridParams, p: f64) -> Result<f64, EnvError> {
    if !(p >= params.p_mgts_min && p <= params.p_mgts_max) {
        return Err(EnvError::OutOfBounds {
            what: "p_mgts",
            value: p,
            lo: params.p_mgts_min,
            hi: params.p_mgts_max,
        });
    }
    Ok(params.lambda_mgts * p)
}

/// Storage O&M cost, (|P_ch| + |P_dc|) · λ_b.
pub fn esd_om_cost(p_ch: f64, p_dc: f64, params: &MicrogridParams) -> f64 {
    (p_ch.abs() + p_dc.abs()) * params.lambda_b
}

/// Inter-microgrid trade cost. Positive trades are purchases (expense),
/// negative ones sales (revenue).
pub fn mg_trade_cost(price_mg: f64, realized_trade_row: &[f64]) -> f64 {
    price_mg * realized_trade_row.iter().sum::<f64>()
}

/// Grid trade cost: purchases at the buy price, sales (negative `p_ig`) at
/// the sell price.
pub fn grid_trade_cost(
    price_buy: f64,
    price_sell: f64,
    p_ig: f64,
    p_ig_max: f64,
) -> Result<f64, EnvError> {
    if !(p_ig.abs() <= p_ig_max) {
        return Err(EnvError::OutOfBounds {
            what: "p_ig",
            value: p_ig,
            lo: -p_ig_max,
            hi: p_ig_max,
        });
    }
    Ok(if p_ig >= 0.0 {
        price_buy * p_ig
    } else {
        price_sell * p_ig
    })
}

/// Active power loss as fixed fractions of generation.
pub fn power_loss(params: &MicrogridParams, p_mgts: f64, p_pv: f64, p_wt: f64) -> f64 {
    params.psi_mgts * p_mgts + params.psi_pv * p_pv + params.psi_wt * p_wt
}

/// Supply minus consumption; zero iff the electrical balance holds.
pub fn power_gap(p_sup: f64, p_con: f64) -> f64 {
    p_sup - p_con
}

/// Supply side of the balance.
pub fn power_supply(p_mgts: f64, p_wt: f64, p_pv: f64, p_dc: f64, trade: f64, p_ig: f64) -> f64 {
    p_mgts + p_wt + p_pv + p_dc + trade + p_ig
}

/// Consumption side of the balance.
pub fn power_consumption(p_load: f64, p_ch: f64, p_loss: f64) -> f64 {
    p_load + p_ch + p_loss
}

pub fn loss_cost(params: &MicrogridParams, p_loss: f64) -> f64 {
    params.lambda_loss * p_loss
}

pub fn imbalance_penalty(params: &MicrogridParams, p_gap: f64) -> f64 {
    params.ell * p_gap * p_gap
}

/// Reward of one agent for one step: the negated total cost.
pub fn step_reward(cost: &CostBreakdown) -> f64 {
    -cost.total
}
