use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{JointTransition, MasacError, MultiAgentEnv, SacHyperparams};
use crate::neural::{
    policy_backward, policy_batch, AdamState, Checkpoint, Mlp, MlpGrads, NetworkCheckpoint,
    PolicyHead,
};

/// Per-agent observation and action widths, fixing the joint critic input
/// order: all observations by agent, then all actions by agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointLayout {
    pub obs_dims: Vec<usize>,
    pub act_dims: Vec<usize>,
}

impl JointLayout {
    pub fn of_env<E: MultiAgentEnv>(env: &E) -> Self {
        let n = env.n_agents();
        JointLayout {
            obs_dims: (0..n).map(|i| env.obs_dim(i)).collect(),
            act_dims: (0..n).map(|i| env.action_dim(i)).collect(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.obs_dims.len()
    }

    pub fn total_obs(&self) -> usize {
        self.obs_dims.iter().sum()
    }

    pub fn total_act(&self) -> usize {
        self.act_dims.iter().sum()
    }

    pub fn critic_input_dim(&self) -> usize {
        self.total_obs() + self.total_act()
    }

    /// Row of agent `i`'s first action entry in the critic input.
    pub fn act_row(&self, i: usize) -> usize {
        self.total_obs() + self.act_dims[..i].iter().sum::<usize>()
    }
}

/// A sampled mini-batch in network form. Per-agent matrices hold one sample
/// per column; actions are normalized.
#[derive(Debug, Clone)]
pub struct Batch {
    pub obs: Vec<DMatrix<f64>>,
    pub actions: Vec<DMatrix<f64>>,
    pub next_obs: Vec<DMatrix<f64>>,
    /// `n_agents × B`, unscaled rewards.
    pub rewards: DMatrix<f64>,
    pub done: Vec<bool>,
}

impl Batch {
    pub fn from_transitions<E: MultiAgentEnv>(
        env: &E,
        items: &[&JointTransition<E::Obs, E::Action>],
    ) -> Self {
        let n = env.n_agents();
        let b = items.len();
        let mut obs = Vec::with_capacity(n);
        let mut next_obs = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        for i in 0..n {
            let (od, ad) = (env.obs_dim(i), env.action_dim(i));
            let mut o = DMatrix::zeros(od, b);
            let mut o2 = DMatrix::zeros(od, b);
            let mut a = DMatrix::zeros(ad, b);
            for (j, tr) in items.iter().enumerate() {
                o.column_mut(j).copy_from_slice(&env.features(i, &tr.x[i]));
                o2.column_mut(j).copy_from_slice(&env.features(i, &tr.x_next[i]));
                a.column_mut(j).copy_from_slice(&env.to_normalized(i, &tr.a[i]));
            }
            obs.push(o);
            next_obs.push(o2);
            actions.push(a);
        }
        Batch {
            obs,
            actions,
            next_obs,
            rewards: DMatrix::from_fn(n, b, |i, j| items[j].r[i]),
            done: items.iter().map(|t| t.done).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }
}

/// Stacks per-agent observation and action blocks into critic input.
pub fn critic_input(obs: &[DMatrix<f64>], actions: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let b = obs[0].ncols();
    let rows: usize = obs.iter().map(|m| m.nrows()).sum::<usize>()
        + actions.iter().map(|m| m.nrows()).sum::<usize>();
    let mut out = DMatrix::zeros(rows, b);
    let mut r = 0;
    for m in obs.iter().chain(actions.iter().copied()) {
        out.rows_mut(r, m.nrows()).copy_from(m);
        r += m.nrows();
    }
    out
}

/// One agent's networks and optimizer states.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentNets {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_critic: Mlp,
    pub critic2: Option<Mlp>,
    pub target_critic2: Option<Mlp>,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub critic2_opt: Option<AdamState>,
}

impl AgentNets {
    pub fn new<R: Rng + ?Sized>(
        layout: &JointLayout,
        agent: usize,
        hp: &SacHyperparams,
        rng: &mut R,
    ) -> Self {
        let mut actor_sizes = vec![layout.obs_dims[agent]];
        actor_sizes.extend(&hp.hidden);
        actor_sizes.push(2 * layout.act_dims[agent]);
        let mut critic_sizes = vec![layout.critic_input_dim()];
        critic_sizes.extend(&hp.hidden);
        critic_sizes.push(1);

        let actor = Mlp::new(&actor_sizes, rng);
        let critic = Mlp::new(&critic_sizes, rng);
        let critic2 = hp.twin_critics.then(|| Mlp::new(&critic_sizes, rng));
        AgentNets {
            actor_opt: AdamState::new(&actor, hp.a_l),
            critic_opt: AdamState::new(&critic, hp.c_l),
            critic2_opt: critic2.as_ref().map(|c| AdamState::new(c, hp.c_l)),
            target_critic: critic.clone(),
            target_critic2: critic2.clone(),
            actor,
            critic,
            critic2,
        }
    }

    /// Live critics, one or two.
    pub fn critics(&self) -> Vec<&Mlp> {
        std::iter::once(&self.critic).chain(self.critic2.as_ref()).collect()
    }

    pub fn target_critics(&self) -> Vec<&Mlp> {
        std::iter::once(&self.target_critic)
            .chain(self.target_critic2.as_ref())
            .collect()
    }

    pub fn to_checkpoint(&self, agent: usize, layout: &JointLayout, hp: &SacHyperparams) -> Checkpoint {
        let mut nets = vec![
            NetworkCheckpoint::from_net("actor", &self.actor, Some(&self.actor_opt)),
            NetworkCheckpoint::from_net("critic", &self.critic, Some(&self.critic_opt)),
            NetworkCheckpoint::from_net("target_critic", &self.target_critic, None),
        ];
        if let (Some(c2), Some(t2)) = (&self.critic2, &self.target_critic2) {
            nets.push(NetworkCheckpoint::from_net("critic2", c2, self.critic2_opt.as_ref()));
            nets.push(NetworkCheckpoint::from_net("target_critic2", t2, None));
        }
        let mut ck = Checkpoint::new(nets);
        ck.meta.insert("agent".into(), agent.into());
        ck.meta.insert(
            "layout".into(),
            serde_json::to_value(layout).expect("layout serializes"),
        );
        ck.meta.insert(
            "hyperparams".into(),
            serde_json::to_value(hp).expect("hyperparameters serialize"),
        );
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, MasacError> {
        let net = |name: &str| -> Result<Mlp, MasacError> { Ok(ck.network(name)?.to_net()?) };
        let opt = |name: &str, n: &Mlp, lr_fallback: f64| -> Result<AdamState, MasacError> {
            Ok(ck
                .network(name)?
                .to_adam()?
                .unwrap_or_else(|| AdamState::new(n, lr_fallback)))
        };
        let actor = net("actor")?;
        let critic = net("critic")?;
        let target_critic = net("target_critic")?;
        let has_twin = ck.networks.iter().any(|n| n.name == "critic2");
        let (critic2, target_critic2, critic2_opt) = if has_twin {
            let c2 = net("critic2")?;
            let o2 = opt("critic2", &c2, 6e-4)?;
            (Some(c2), Some(net("target_critic2")?), Some(o2))
        } else {
            (None, None, None)
        };
        if critic.layer_sizes() != target_critic.layer_sizes() {
            return Err(MasacError::Checkpoint("critic and target critic shapes differ".into()));
        }
        Ok(AgentNets {
            actor_opt: opt("actor", &actor, 4e-4)?,
            critic_opt: opt("critic", &critic, 6e-4)?,
            actor,
            critic,
            target_critic,
            critic2,
            target_critic2,
            critic2_opt,
        })
    }
}

fn normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Elementwise minimum over one or two critics' outputs (`1 × B`), with the
/// index of the critic that attained it.
fn min_q(critics: &[&Mlp], input: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<usize>), MasacError> {
    let mut best: Vec<f64> = Vec::new();
    let mut which: Vec<usize> = Vec::new();
    for (c, net) in critics.iter().enumerate() {
        let q = net.forward(input)?;
        if c == 0 {
            best = q.as_slice().to_vec();
            which = vec![0; best.len()];
        } else {
            for (j, &v) in q.as_slice().iter().enumerate() {
                if v < best[j] {
                    best[j] = v;
                    which[j] = c;
                }
            }
        }
    }
    Ok((best, which))
}

/// Soft Bellman targets for agent `i`:
/// `w = s·r_i + γ(1 − done)(Q̄_i(x′, a′) − κ log π_i(a′_i | s′_i))`
/// with `a′` drawn once per element from every agent's current actor.
pub fn critic_target<R: Rng + ?Sized>(
    agent: usize,
    batch: &Batch,
    nets: &[AgentNets],
    hp: &SacHyperparams,
    rng: &mut R,
) -> Result<Vec<f64>, MasacError> {
    let b = batch.len();
    let head = hp.policy_head();
    let mut next_actions = Vec::with_capacity(nets.len());
    let mut own_log_prob = Vec::new();
    for (k, n) in nets.iter().enumerate() {
        let d = batch.actions[k].nrows();
        let noise = normal_matrix(d, b, rng);
        let bp = policy_batch(&n.actor, &batch.next_obs[k], &noise, head)?;
        if k == agent {
            own_log_prob = bp.log_prob.clone();
        }
        next_actions.push(bp.action);
    }
    let refs: Vec<&DMatrix<f64>> = next_actions.iter().collect();
    let input = critic_input(&batch.next_obs, &refs);
    let (q_next, _) = min_q(&nets[agent].target_critics(), &input)?;
    Ok((0..b)
        .map(|j| {
            let r = hp.reward_scale * batch.rewards[(agent, j)];
            if batch.done[j] {
                r
            } else {
                r + hp.gamma * (q_next[j] - hp.kappa * own_log_prob[j])
            }
        })
        .collect())
}

/// `½·mean((Q − w)²)` and its parameter gradient.
pub fn critic_loss_grad(
    critic: &Mlp,
    input: &DMatrix<f64>,
    targets: &[f64],
) -> Result<(f64, MlpGrads), MasacError> {
    let cache = critic.forward_cached(input)?;
    let q = cache.output();
    let b = targets.len() as f64;
    let resid = DMatrix::from_fn(1, targets.len(), |_, j| q[(0, j)] - targets[j]);
    let loss = 0.5 * resid.iter().map(|r| r * r).sum::<f64>() / b;
    let (grads, _) = critic.backward(&cache, &(resid / b))?;
    Ok((loss, grads))
}

/// One Adam step on agent `i`'s critic(s). Returns the pre-update loss of
/// the first critic.
pub fn critic_update<R: Rng + ?Sized>(
    agent: usize,
    batch: &Batch,
    nets: &mut [AgentNets],
    hp: &SacHyperparams,
    rng: &mut R,
) -> Result<f64, MasacError> {
    let w = critic_target(agent, batch, nets, hp, rng)?;
    let refs: Vec<&DMatrix<f64>> = batch.actions.iter().collect();
    let input = critic_input(&batch.obs, &refs);
    let n = &mut nets[agent];
    let (loss, grads) = critic_loss_grad(&n.critic, &input, &w)?;
    if !loss.is_finite() {
        return Err(MasacError::NonFiniteLoss { agent, what: "critic" });
    }
    n.critic_opt.update(&mut n.critic, &grads)?;
    if let (Some(c2), Some(opt2)) = (n.critic2.as_mut(), n.critic2_opt.as_mut()) {
        let (loss2, grads2) = critic_loss_grad(c2, &input, &w)?;
        if !loss2.is_finite() {
            return Err(MasacError::NonFiniteLoss { agent, what: "critic" });
        }
        opt2.update(c2, &grads2)?;
    }
    Ok(loss)
}

/// `mean(κ·log π_i(ã_i | s_i) − Q_i(x, a_{−i}, ã_i))` for fresh reparameterized
/// `ã_i` drawn with `noise`, and its gradient w.r.t. the actor parameters.
#[allow(clippy::too_many_arguments)]
pub fn actor_loss_grad(
    agent: usize,
    actor: &Mlp,
    critics: &[&Mlp],
    batch: &Batch,
    noise: &DMatrix<f64>,
    kappa: f64,
    head: PolicyHead,
) -> Result<(f64, MlpGrads), MasacError> {
    let b = batch.len();
    let bp = policy_batch(actor, &batch.obs[agent], noise, head)?;
    let refs: Vec<&DMatrix<f64>> = batch
        .actions
        .iter()
        .enumerate()
        .map(|(k, a)| if k == agent { &bp.action } else { a })
        .collect();
    let input = critic_input(&batch.obs, &refs);
    let caches = critics
        .iter()
        .map(|c| c.forward_cached(&input))
        .collect::<Result<Vec<_>, _>>()?;
    let mut q = caches[0].output().as_slice().to_vec();
    let mut which = vec![0usize; b];
    for (c, cache) in caches.iter().enumerate().skip(1) {
        for (j, &v) in cache.output().as_slice().iter().enumerate() {
            if v < q[j] {
                q[j] = v;
                which[j] = c;
            }
        }
    }
    let bf = b as f64;
    let loss = (0..b).map(|j| kappa * bp.log_prob[j] - q[j]).sum::<f64>() / bf;

    let d = bp.action.nrows();
    let row = batch.obs.iter().map(|m| m.nrows()).sum::<usize>()
        + batch.actions[..agent].iter().map(|m| m.nrows()).sum::<usize>();
    let mut d_action = DMatrix::zeros(d, b);
    for (c, (net, cache)) in critics.iter().zip(&caches).enumerate() {
        let up = DMatrix::from_fn(1, b, |_, j| if which[j] == c { -1.0 / bf } else { 0.0 });
        if up.iter().all(|v| *v == 0.0) {
            continue;
        }
        let dx = net.backward_input(cache, &up)?;
        d_action += dx.rows(row, d);
    }
    let grads = policy_backward(actor, &bp, &d_action, &vec![kappa / bf; b])?;
    Ok((loss, grads))
}

/// One Adam step on agent `i`'s actor against its live critic(s). Returns
/// the pre-update loss.
pub fn actor_update<R: Rng + ?Sized>(
    agent: usize,
    batch: &Batch,
    nets: &mut [AgentNets],
    hp: &SacHyperparams,
    rng: &mut R,
) -> Result<f64, MasacError> {
    let d = batch.actions[agent].nrows();
    let noise = normal_matrix(d, batch.len(), rng);
    let n = &mut nets[agent];
    let (loss, grads) = {
        let critics = n.critics();
        actor_loss_grad(agent, &n.actor, &critics, batch, &noise, hp.kappa, hp.policy_head())?
    };
    if !loss.is_finite() {
        return Err(MasacError::NonFiniteLoss { agent, what: "actor" });
    }
    n.actor_opt.update(&mut n.actor, &grads)?;
    Ok(loss)
}

/// `ξ̄ ← φ·ξ + (1 − φ)·ξ̄` for every critic of one agent.
pub fn soft_update(nets: &mut AgentNets, phi_soft: f64) {
    nets.target_critic.blend_from(&nets.critic, phi_soft);
    if let (Some(t), Some(c)) = (nets.target_critic2.as_mut(), nets.critic2.as_ref()) {
        t.blend_from(c, phi_soft);
    }
}
