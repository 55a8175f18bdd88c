//! The multi-microgrid environment.
//!
//! Each step takes one [`AgentAction`] per microgrid and runs, in order:
//! trade clearing, power loss, residual power, storage absorption (or the
//! terminal storage rule on the last step), costs and rewards, and finally
//! the storage update.

mod action;
pub mod equations;
mod storage;
mod trace;
mod trade;

pub use action::{ActionSpace, AgentAction, Observation, OBS_DIM};
pub use equations::{
    esd_om_cost, grid_trade_cost, imbalance_penalty, loss_cost, mg_trade_cost, mgts_cost,
    power_consumption, power_gap, power_loss, power_supply, step_reward,
};
pub use storage::{clip_esd, command_esd, esd_step, soc, terminal_esd, EsdDispatch, StorageState};
pub use trace::{episode_objective, read_trace, trace_rows, write_trace, TraceRow};
pub use trade::clear_trades;

use serde::{Deserialize, Serialize};

use crate::domain::{CostBreakdown, DomainError, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("step called after the episode finished; call reset first")]
    StepAfterDone,
    #[error("expected {expected} agent actions, got {found}")]
    AgentCount { expected: usize, found: usize },
    #[error("action of agent {agent} is malformed: {reason}")]
    MalformedAction { agent: usize, reason: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("trace I/O: {0}")]
    Trace(String),
}

/// Environment switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Mode 2 (true) clears inter-MG trades; Mode 1 (false) forces them to 0.
    pub trading_enabled: bool,
    /// Adds an explicit storage power command to every action.
    pub esd_in_action: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            trading_enabled: true,
            esd_in_action: false,
        }
    }
}

/// Everything that happened in one step, per microgrid.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Index of the step that was executed.
    pub t: usize,
    pub next_obs: Vec<Observation>,
    pub reward: Vec<f64>,
    pub cost: Vec<CostBreakdown>,
    pub p_mgts: Vec<f64>,
    pub realized_trade: Vec<Vec<f64>>,
    pub realized_grid: Vec<f64>,
    pub esd_charge: Vec<f64>,
    pub esd_discharge: Vec<f64>,
    pub terminal_shortfall: Vec<f64>,
    pub p_loss: Vec<f64>,
    pub p_gap: Vec<f64>,
    /// Residual left after storage absorption; equals `p_gap` up to rounding.
    pub leftover: Vec<f64>,
    /// Stored energy after the step (kWh).
    pub s_esd: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct MmgEnv {
    scenario: Scenario,
    config: EnvConfig,
    spaces: Vec<ActionSpace>,
    storage: Vec<StorageState>,
    t: usize,
}

impl MmgEnv {
    pub fn new(scenario: Scenario, config: EnvConfig) -> Result<Self, EnvError> {
        scenario.validate()?;
        let spaces = (0..scenario.n_mg)
            .map(|i| ActionSpace::new(&scenario, i, config.esd_in_action))
            .collect();
        let storage = scenario
            .params
            .iter()
            .map(|p| StorageState { s_esd: p.s_esd_min })
            .collect();
        Ok(MmgEnv {
            scenario,
            config,
            spaces,
            storage,
            t: 0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> EnvConfig {
        self.config
    }

    pub fn n_agents(&self) -> usize {
        self.scenario.n_mg
    }

    pub fn action_space(&self, agent: usize) -> &ActionSpace {
        &self.spaces[agent]
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.scenario.horizon_t
    }

    pub fn storage(&self) -> &[StorageState] {
        &self.storage
    }

    /// Starts a new day with every storage device at `s_esd_min`.
    pub fn reset(&mut self) -> Vec<Observation> {
        self.t = 0;
        for (s, p) in self.storage.iter_mut().zip(&self.scenario.params) {
            s.s_esd = p.s_esd_min;
        }
        self.observe_all()
    }

    /// Observation of agent `i` at the current step. After the last step the
    /// series wrap to the start of the next day.
    pub fn observe(&self, i: usize) -> Observation {
        let sc = &self.scenario;
        let t = self.t % sc.horizon_t;
        Observation {
            p_load: sc.load[i][t],
            soc: soc(self.storage[i], &sc.params[i]),
            p_wt: sc.p_wt[i][t],
            p_pv: sc.p_pv[i][t],
            price_mg: sc.price_mg[t],
            price_grid_buy: sc.price_grid_buy[t],
            price_grid_sell: sc.price_grid_sell[t],
            t_of_day: t as f64 / sc.horizon_t as f64,
        }
    }

    pub fn observe_all(&self) -> Vec<Observation> {
        (0..self.n_agents()).map(|i| self.observe(i)).collect()
    }

    pub fn step(&mut self, actions: &[AgentAction]) -> Result<StepResult, EnvError> {
        let n = self.n_agents();
        if self.is_done() {
            return Err(EnvError::StepAfterDone);
        }
        if actions.len() != n {
            return Err(EnvError::AgentCount {
                expected: n,
                found: actions.len(),
            });
        }
        for (i, a) in actions.iter().enumerate() {
            self.spaces[i].check(i, a)?;
        }
        let sc = &self.scenario;
        let t = self.t;
        let dt = sc.dt;
        let terminal = t + 1 == sc.horizon_t;

        let realized_trade = if self.config.trading_enabled {
            let desired: Vec<Vec<f64>> = actions.iter().map(|a| a.p_ij.clone()).collect();
            clear_trades(&desired)
        } else {
            vec![vec![0.0; n]; n]
        };

        let mut out = StepResult {
            t,
            next_obs: Vec::new(),
            reward: Vec::with_capacity(n),
            cost: Vec::with_capacity(n),
            p_mgts: Vec::with_capacity(n),
            realized_trade,
            realized_grid: Vec::with_capacity(n),
            esd_charge: Vec::with_capacity(n),
            esd_discharge: Vec::with_capacity(n),
            terminal_shortfall: Vec::with_capacity(n),
            p_loss: Vec::with_capacity(n),
            p_gap: Vec::with_capacity(n),
            leftover: Vec::with_capacity(n),
            s_esd: Vec::with_capacity(n),
            done: terminal,
        };

        let mut next_storage = Vec::with_capacity(n);
        for (i, a) in actions.iter().enumerate() {
            let p = &sc.params[i];
            let (load, wt, pv) = (sc.load[i][t], sc.p_wt[i][t], sc.p_pv[i][t]);
            let trade: f64 = out.realized_trade[i].iter().sum();
            let p_loss = power_loss(p, a.p_mgts, pv, wt);
            let residual = a.p_mgts + wt + pv + trade + a.p_ig - load - p_loss;
            let dispatch = if terminal {
                terminal_esd(residual, self.storage[i], p, dt)
            } else if let Some(cmd) = a.esd.filter(|_| self.config.esd_in_action) {
                command_esd(residual, cmd, self.storage[i], p, dt)
            } else {
                clip_esd(residual, self.storage[i], p, dt)
            };
            let p_sup = power_supply(a.p_mgts, wt, pv, dispatch.p_dc, trade, a.p_ig);
            let p_con = power_consumption(load, dispatch.p_ch, p_loss) + dispatch.terminal_shortfall;
            let p_gap = power_gap(p_sup, p_con);

            let cost = CostBreakdown::new(
                mgts_cost(p, a.p_mgts)?,
                mg_trade_cost(sc.price_mg[t], &out.realized_trade[i]),
                grid_trade_cost(sc.price_grid_buy[t], sc.price_grid_sell[t], a.p_ig, p.p_ig_max)?,
                esd_om_cost(dispatch.p_ch, dispatch.p_dc, p),
                loss_cost(p, p_loss),
                imbalance_penalty(p, p_gap),
            );
            let next = esd_step(self.storage[i], dispatch.p_ch, dispatch.p_dc, p, dt)?;

            out.reward.push(step_reward(&cost));
            out.cost.push(cost);
            out.p_mgts.push(a.p_mgts);
            out.realized_grid.push(a.p_ig);
            out.esd_charge.push(dispatch.p_ch);
            out.esd_discharge.push(dispatch.p_dc);
            out.terminal_shortfall.push(dispatch.terminal_shortfall);
            out.p_loss.push(p_loss);
            out.p_gap.push(p_gap);
            out.leftover.push(dispatch.leftover);
            out.s_esd.push(next.s_esd);
            next_storage.push(next);
        }
        self.storage = next_storage;
        self.t += 1;
        out.next_obs = self.observe_all();
        Ok(out)
    }
}
