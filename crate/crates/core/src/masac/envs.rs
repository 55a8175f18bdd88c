use crate::env::{AgentAction, EnvConfig, EnvError, MmgEnv, Observation, StepResult, OBS_DIM};
use crate::Scenario;

/// What the trainer needs from a cooperative multi-agent environment.
///
/// Actions cross this boundary in two forms: the policy's normalized
/// `[-1, 1]^d` vector and the environment's own unit-bearing action type.
pub trait MultiAgentEnv {
    type Obs: Clone;
    type Action: Clone;

    fn n_agents(&self) -> usize;
    fn obs_dim(&self, agent: usize) -> usize;
    fn action_dim(&self, agent: usize) -> usize;
    fn reset(&mut self) -> Vec<Self::Obs>;
    /// Network input for one agent's own observation.
    fn features(&self, agent: usize, obs: &Self::Obs) -> Vec<f64>;
    fn to_env_action(&self, agent: usize, normalized: &[f64]) -> Self::Action;
    fn to_normalized(&self, agent: usize, action: &Self::Action) -> Vec<f64>;
    fn step(&mut self, actions: &[Self::Action]) -> Result<EnvTransition<Self::Obs>, EnvError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvTransition<O> {
    pub next_obs: Vec<O>,
    pub rewards: Vec<f64>,
    pub done: bool,
}

/// [`MmgEnv`] behind the trainer interface, keeping the last full step.
#[derive(Debug, Clone)]
pub struct MmgTask {
    env: MmgEnv,
    power_scale: Vec<f64>,
    last: Option<StepResult>,
}

impl MmgTask {
    pub fn new(scenario: Scenario, config: EnvConfig) -> Result<Self, EnvError> {
        let power_scale = power_scales(&scenario);
        Ok(MmgTask {
            env: MmgEnv::new(scenario, config)?,
            power_scale,
            last: None,
        })
    }

    pub fn env(&self) -> &MmgEnv {
        &self.env
    }

    pub fn last_step(&self) -> Option<&StepResult> {
        self.last.as_ref()
    }

    pub fn power_scale(&self, agent: usize) -> f64 {
        self.power_scale[agent]
    }
}

/// Per-MG normalizer for power features: the largest load or renewable value
/// in the series, at least 1 kW.
pub fn power_scales(s: &Scenario) -> Vec<f64> {
    (0..s.n_mg)
        .map(|i| {
            s.load[i]
                .iter()
                .chain(&s.p_wt[i])
                .chain(&s.p_pv[i])
                .fold(1.0f64, |m, &v| m.max(v))
        })
        .collect()
}

impl MultiAgentEnv for MmgTask {
    type Obs = Observation;
    type Action = AgentAction;

    fn n_agents(&self) -> usize {
        self.env.n_agents()
    }

    fn obs_dim(&self, _agent: usize) -> usize {
        OBS_DIM
    }

    fn action_dim(&self, agent: usize) -> usize {
        self.env.action_space(agent).dim()
    }

    fn reset(&mut self) -> Vec<Observation> {
        self.last = None;
        self.env.reset()
    }

    fn features(&self, agent: usize, obs: &Observation) -> Vec<f64> {
        obs.features(self.power_scale[agent]).to_vec()
    }

    fn to_env_action(&self, agent: usize, normalized: &[f64]) -> AgentAction {
        self.env.action_space(agent).scale(normalized)
    }

    fn to_normalized(&self, agent: usize, action: &AgentAction) -> Vec<f64> {
        self.env.action_space(agent).unscale(action)
    }

    fn step(&mut self, actions: &[AgentAction]) -> Result<EnvTransition<Observation>, EnvError> {
        let res = self.env.step(actions)?;
        let tr = EnvTransition {
            next_obs: res.next_obs.clone(),
            rewards: res.reward.clone(),
            done: res.done,
        };
        self.last = Some(res);
        Ok(tr)
    }
}

/// Single-step cooperative game: every agent observes a constant and is paid
/// `−(a − target)²` for its own action `a ∈ [-1, 1]`.
#[derive(Debug, Clone)]
pub struct ToyEnv {
    pub n_agents: usize,
    pub target: f64,
}

impl ToyEnv {
    pub fn new(n_agents: usize) -> Self {
        ToyEnv { n_agents, target: 0.5 }
    }
}

impl MultiAgentEnv for ToyEnv {
    type Obs = f64;
    type Action = f64;

    fn n_agents(&self) -> usize {
        self.n_agents
    }

    fn obs_dim(&self, _agent: usize) -> usize {
        1
    }

    fn action_dim(&self, _agent: usize) -> usize {
        1
    }

    fn reset(&mut self) -> Vec<f64> {
        vec![1.0; self.n_agents]
    }

    fn features(&self, _agent: usize, obs: &f64) -> Vec<f64> {
        vec![*obs]
    }

    fn to_env_action(&self, _agent: usize, normalized: &[f64]) -> f64 {
        normalized[0].clamp(-1.0, 1.0)
    }

    fn to_normalized(&self, _agent: usize, action: &f64) -> Vec<f64> {
        vec![*action]
    }

    fn step(&mut self, actions: &[f64]) -> Result<EnvTransition<f64>, EnvError> {
        if actions.len() != self.n_agents {
            return Err(EnvError::AgentCount {
                expected: self.n_agents,
                found: actions.len(),
            });
        }
        Ok(EnvTransition {
            next_obs: vec![1.0; self.n_agents],
            rewards: actions.iter().map(|a| -(a - self.target).powi(2)).collect(),
            done: true,
        })
    }
}
