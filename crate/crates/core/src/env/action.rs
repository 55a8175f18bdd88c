use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::domain::Scenario;

/// Length of [`Observation::features`].
pub const OBS_DIM: usize = 8;

/// What one microgrid's agent sees at a step. Only local quantities plus the
/// public price signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub p_load: f64,
    pub soc: f64,
    pub p_wt: f64,
    pub p_pv: f64,
    pub price_mg: f64,
    pub price_grid_buy: f64,
    pub price_grid_sell: f64,
    /// Step index divided by the horizon, in [0, 1).
    pub t_of_day: f64,
}

impl Observation {
    /// Network input: powers divided by `power_scale`, the rest as is.
    pub fn features(&self, power_scale: f64) -> [f64; OBS_DIM] {
        [
            self.p_load / power_scale,
            self.soc,
            self.p_wt / power_scale,
            self.p_pv / power_scale,
            self.price_mg,
            self.price_grid_buy,
            self.price_grid_sell,
            self.t_of_day,
        ]
    }
}

/// One agent's decision in environment units (kW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAction {
    pub p_mgts: f64,
    /// Requested trade with every MG, indexed by MG; own entry is 0.
    /// Positive = buy.
    pub p_ij: Vec<f64>,
    /// Grid trade, positive = buy.
    pub p_ig: f64,
    /// Storage command (positive = charge); only used with `esd_in_action`.
    pub esd: Option<f64>,
}

/// Affine map between the policy's [-1, 1]^d box and environment units.
///
/// Layout of the normalized vector: `[p_mgts, p_ij for each peer j in index
/// order, p_ig, (esd)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub agent: usize,
    pub n_mg: usize,
    pub p_mgts_min: f64,
    pub p_mgts_max: f64,
    pub p_ij_max: f64,
    pub p_ig_max: f64,
    pub p_ch_max: f64,
    pub p_dc_max: f64,
    pub esd_in_action: bool,
}

impl ActionSpace {
    pub fn new(scenario: &Scenario, agent: usize, esd_in_action: bool) -> Self {
        let p = &scenario.params[agent];
        ActionSpace {
            agent,
            n_mg: scenario.n_mg,
            p_mgts_min: p.p_mgts_min,
            p_mgts_max: p.p_mgts_max,
            p_ij_max: p.p_ij_max,
            p_ig_max: p.p_ig_max,
            p_ch_max: p.p_ch_max,
            p_dc_max: p.p_dc_max,
            esd_in_action,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_mg + 1 + usize::from(self.esd_in_action)
    }

    fn peers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_mg).filter(move |&j| j != self.agent)
    }

    /// Maps `u ∈ [-1, 1]^dim` to an action; components are clamped first.
    pub fn scale(&self, u: &[f64]) -> AgentAction {
        assert_eq!(u.len(), self.dim(), "action vector length");
        let c = |x: f64| x.clamp(-1.0, 1.0);
        let span = self.p_mgts_max - self.p_mgts_min;
        let p_mgts = (self.p_mgts_min + 0.5 * (c(u[0]) + 1.0) * span).clamp(self.p_mgts_min, self.p_mgts_max);
        let mut p_ij = vec![0.0; self.n_mg];
        for (k, j) in self.peers().enumerate() {
            p_ij[j] = c(u[1 + k]) * self.p_ij_max;
        }
        let p_ig = c(u[self.n_mg]) * self.p_ig_max;
        let esd = self.esd_in_action.then(|| {
            let v = c(u[self.n_mg + 1]);
            if v >= 0.0 {
                v * self.p_ch_max
            } else {
                v * self.p_dc_max
            }
        });
        AgentAction {
            p_mgts,
            p_ij,
            p_ig,
            esd,
        }
    }

    /// Inverse of [`scale`](Self::scale).
    pub fn unscale(&self, a: &AgentAction) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.dim());
        let span = self.p_mgts_max - self.p_mgts_min;
        u.push(if span > 0.0 {
            2.0 * (a.p_mgts - self.p_mgts_min) / span - 1.0
        } else {
            0.0
        });
        for j in self.peers() {
            u.push(ratio(a.p_ij[j], self.p_ij_max));
        }
        u.push(ratio(a.p_ig, self.p_ig_max));
        if self.esd_in_action {
            let e = a.esd.unwrap_or(0.0);
            u.push(if e >= 0.0 {
                ratio(e, self.p_ch_max)
            } else {
                ratio(e, self.p_dc_max)
            });
        }
        u
    }

    pub fn check(&self, agent: usize, a: &AgentAction) -> Result<(), EnvError> {
        let bad = |reason: String| Err(EnvError::MalformedAction { agent, reason });
        if a.p_ij.len() != self.n_mg {
            return bad(format!("p_ij has {} entries, expected {}", a.p_ij.len(), self.n_mg));
        }
        if a.p_ij[self.agent] != 0.0 {
            return bad("trade with itself must be 0".into());
        }
        if !(a.p_mgts >= self.p_mgts_min && a.p_mgts <= self.p_mgts_max) {
            return Err(EnvError::OutOfBounds {
                what: "p_mgts",
                value: a.p_mgts,
                lo: self.p_mgts_min,
                hi: self.p_mgts_max,
            });
        }
        if let Some(&v) = a.p_ij.iter().find(|v| !(v.abs() <= self.p_ij_max)) {
            return Err(EnvError::OutOfBounds {
                what: "p_ij",
                value: v,
                lo: -self.p_ij_max,
                hi: self.p_ij_max,
            });
        }
        if !(a.p_ig.abs() <= self.p_ig_max) {
            return Err(EnvError::OutOfBounds {
                what: "p_ig",
                value: a.p_ig,
                lo: -self.p_ig_max,
                hi: self.p_ig_max,
            });
        }
        if let Some(e) = a.esd {
            if !(e >= -self.p_dc_max && e <= self.p_ch_max) {
                return Err(EnvError::OutOfBounds {
                    what: "esd",
                    value: e,
                    lo: -self.p_dc_max,
                    hi: self.p_ch_max,
                });
            }
        }
        Ok(())
    }
}

fn ratio(v: f64, max: f64) -> f64 {
    if max > 0.0 {
        (v / max).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}
