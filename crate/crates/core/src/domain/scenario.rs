use serde::{Deserialize, Serialize};

use super::{DomainError, MicrogridParams};

/// Per-microgrid time series and price schedules over a horizon.
///
/// Series are indexed `[mg][t]`. Construct through [`Scenario::validate`]d
/// paths (loading, generation); the environment refuses invalid scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_mg: usize,
    pub horizon_t: usize,
    /// Step length in hours.
    pub dt: f64,
    pub load: Vec<Vec<f64>>,
    pub p_wt: Vec<Vec<f64>>,
    pub p_pv: Vec<Vec<f64>>,
    pub price_mg: Vec<f64>,
    pub price_grid_buy: Vec<f64>,
    pub price_grid_sell: Vec<f64>,
    pub params: Vec<MicrogridParams>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.n_mg == 0 {
            return Err(DomainError::Invalid("n_mg must be at least 1".into()));
        }
        if self.horizon_t == 0 {
            return Err(DomainError::Invalid("horizon_t must be at least 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DomainError::Invalid(format!("dt = {} must be positive", self.dt)));
        }
        let per_mg = [("params", self.params.len())]
            .into_iter()
            .chain([
                ("load", self.load.len()),
                ("p_wt", self.p_wt.len()),
                ("p_pv", self.p_pv.len()),
            ]);
        for (name, len) in per_mg {
            if len != self.n_mg {
                return Err(DomainError::SeriesLength {
                    series: name.into(),
                    expected: self.n_mg,
                    found: len,
                });
            }
        }
        for (mg, p) in self.params.iter().enumerate() {
            p.validate(mg)?;
        }
        for (name, series) in [
            ("load", &self.load),
            ("p_wt", &self.p_wt),
            ("p_pv", &self.p_pv),
        ] {
            for (mg, row) in series.iter().enumerate() {
                if row.len() != self.horizon_t {
                    return Err(DomainError::SeriesLength {
                        series: format!("{name}[{mg}]"),
                        expected: self.horizon_t,
                        found: row.len(),
                    });
                }
                if let Some((t, &value)) = row
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
                {
                    return Err(DomainError::NegativePower {
                        mg,
                        series: name,
                        t,
                        value,
                    });
                }
            }
        }
        for (name, series) in [
            ("price_mg", &self.price_mg),
            ("price_grid_buy", &self.price_grid_buy),
            ("price_grid_sell", &self.price_grid_sell),
        ] {
            if series.len() != self.horizon_t {
                return Err(DomainError::SeriesLength {
                    series: name.into(),
                    expected: self.horizon_t,
                    found: series.len(),
                });
            }
            if let Some(v) = series.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(DomainError::Invalid(format!(
                    "{name} contains {v}; prices must be finite and >= 0"
                )));
            }
        }
        self.check_price_ordering()
    }

    /// sell <= mg <= buy at every step.
    pub fn check_price_ordering(&self) -> Result<(), DomainError> {
        for t in 0..self.horizon_t {
            let (sell, mg, buy) = (
                self.price_grid_sell[t],
                self.price_mg[t],
                self.price_grid_buy[t],
            );
            if !(sell <= mg && mg <= buy) {
                return Err(DomainError::PriceOrdering { t, sell, mg, buy });
            }
        }
        Ok(())
    }

    /// Renewable output (WT + PV) of `mg` at `t`.
    pub fn renewables(&self, mg: usize, t: usize) -> f64 {
        self.p_wt[mg][t] + self.p_pv[mg][t]
    }

    /// Σ_t (load − renewables); positive for a net-deficit microgrid.
    pub fn net_deficit(&self, mg: usize) -> f64 {
        (0..self.horizon_t)
            .map(|t| self.load[mg][t] - self.renewables(mg, t))
            .sum()
    }

    /// Returns a copy with every microgrid's parameters passed through `f`.
    pub fn map_params(&self, f: impl Fn(usize, &MicrogridParams) -> MicrogridParams) -> Self {
        let mut out = self.clone();
        out.params = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| f(i, p))
            .collect();
        out
    }
}

/// The six per-step, per-microgrid cost terms of the operating-cost objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub mgts_cost: f64,
    pub mg_trade_cost: f64,
    pub grid_trade_cost: f64,
    pub esd_om_cost: f64,
    pub loss_cost: f64,
    pub imbalance_penalty: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(
        mgts_cost: f64,
        mg_trade_cost: f64,
        grid_trade_cost: f64,
        esd_om_cost: f64,
        loss_cost: f64,
        imbalance_penalty: f64,
    ) -> Self {
        let total = mgts_cost
            + mg_trade_cost
            + grid_trade_cost
            + esd_om_cost
            + loss_cost
            + imbalance_penalty;
        CostBreakdown {
            mgts_cost,
            mg_trade_cost,
            grid_trade_cost,
            esd_om_cost,
            loss_cost,
            imbalance_penalty,
            total,
        }
    }

    pub fn components(&self) -> [f64; 6] {
        [
            self.mgts_cost,
            self.mg_trade_cost,
            self.grid_trade_cost,
            self.esd_om_cost,
            self.loss_cost,
            self.imbalance_penalty,
        ]
    }
}

impl std::ops::AddAssign for CostBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        *self = CostBreakdown::new(
            self.mgts_cost + rhs.mgts_cost,
            self.mg_trade_cost + rhs.mg_trade_cost,
            self.grid_trade_cost + rhs.grid_trade_cost,
            self.esd_om_cost + rhs.esd_om_cost,
            self.loss_cost + rhs.loss_cost,
            self.imbalance_penalty + rhs.imbalance_penalty,
        );
    }
}
