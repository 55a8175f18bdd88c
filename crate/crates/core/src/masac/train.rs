use std::path::Path;
use std::time::Instant;

use rand::Rng;

use super::agent::{actor_update, critic_update, soft_update, AgentNets, Batch, JointLayout};
use super::{
    JointTransition, MasacError, MmgTask, MultiAgentEnv, ReplayBuffer, SacHyperparams,
    SoftUpdateSchedule,
};
use crate::env::{trace_rows, EnvConfig, StepResult, TraceRow};
use crate::neural::{deterministic_action, sample_policy, Checkpoint, Mlp, PolicyHead};
use crate::rng::{stream, stream_rng};
use crate::{CostBreakdown, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    /// Sum over agents and steps of the raw environment reward.
    pub total_reward: f64,
    /// Seconds since training started, at the end of this episode.
    pub wall_time_s: f64,
    pub agent_rewards: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub episodes: Vec<EpisodeRecord>,
    pub wall_time_s: f64,
    pub agents: Vec<AgentNets>,
    pub layout: JointLayout,
    pub hyperparams: SacHyperparams,
    pub seed: u64,
}

impl TrainingReport {
    pub fn total_rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.total_reward).collect()
    }

    /// Mean total reward over the last `window` episodes (fewer if the run
    /// was shorter).
    pub fn final_mean(&self, window: usize) -> f64 {
        tail_mean(&self.total_rewards(), window)
    }

    pub fn policy(&self) -> DecentralizedPolicy {
        DecentralizedPolicy {
            actors: self.agents.iter().map(|a| a.actor.clone()).collect(),
            head: self.hyperparams.policy_head(),
        }
    }

    pub fn checkpoints(&self) -> Vec<Checkpoint> {
        self.agents
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_checkpoint(i, &self.layout, &self.hyperparams))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), MasacError> {
        write_rewards_csv(path, &self.episodes)
    }
}

pub fn tail_mean(xs: &[f64], window: usize) -> f64 {
    let w = window.min(xs.len()).max(1);
    xs[xs.len().saturating_sub(w)..].iter().sum::<f64>() / w as f64
}

/// Trailing moving mean; entry `k` averages `xs[k+1−w ..= k]`, using fewer
/// points at the start.
pub fn moving_mean(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for k in 0..xs.len() {
        acc += xs[k];
        if k >= w {
            acc -= xs[k - w];
        }
        out.push(acc / (k + 1).min(w) as f64);
    }
    out
}

/// First 1-based episode from which the `window`-episode moving mean stays
/// within `rel_tol` of its final value. Only full windows are considered.
pub fn convergence_episode(rewards: &[f64], window: usize, rel_tol: f64) -> Option<usize> {
    if rewards.is_empty() {
        return None;
    }
    let w = window.clamp(1, rewards.len());
    let mm = moving_mean(rewards, w);
    let last = *mm.last().unwrap();
    let tol = rel_tol * last.abs();
    let mut first = rewards.len();
    for k in (w - 1..rewards.len()).rev() {
        if (mm[k] - last).abs() <= tol {
            first = k;
        } else {
            break;
        }
    }
    Some(first + 1)
}

pub fn write_rewards_csv(path: &Path, episodes: &[EpisodeRecord]) -> Result<(), MasacError> {
    let io = |e: csv::Error| MasacError::Report(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let n = episodes.first().map_or(0, |e| e.agent_rewards.len());
    let mut header = vec!["episode".to_string(), "total_reward".into(), "wall_time_s".into()];
    header.extend((1..=n).map(|i| format!("reward_mg{i}")));
    w.write_record(&header).map_err(io)?;
    for e in episodes {
        let mut rec = vec![e.episode.to_string(), e.total_reward.to_string(), e.wall_time_s.to_string()];
        rec.extend(e.agent_rewards.iter().map(|r| r.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| MasacError::Report(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn read_rewards_csv(path: &Path) -> Result<Vec<EpisodeRecord>, MasacError> {
    let err = |m: String| MasacError::Report(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let header = r.headers().map_err(|e| err(e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "episode" || &header[1] != "total_reward" || &header[2] != "wall_time_s" {
        return Err(err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |k: usize| -> Result<f64, MasacError> {
            rec.get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| err(format!("row {}: bad `{}`", row + 1, &header[k])))
        };
        let episode = rec
            .get(0)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| err(format!("row {}: bad episode", row + 1)))?;
        out.push(EpisodeRecord {
            episode,
            total_reward: num(1)?,
            wall_time_s: num(2)?,
            agent_rewards: (3..header.len()).map(num).collect::<Result<_, _>>()?,
        });
    }
    Ok(out)
}

fn as_divergence(episode: usize, e: MasacError) -> MasacError {
    match e {
        MasacError::NonFiniteLoss { agent, what } => MasacError::Divergence { episode, agent, what },
        MasacError::Neural(crate::neural::NeuralError::NonFiniteGradient { .. }) => {
            MasacError::Divergence {
                episode,
                agent: usize::MAX,
                what: "gradient",
            }
        }
        other => other,
    }
}

/// Runs the full training loop. `on_episode` sees each finished episode.
pub fn train_with<E, F>(
    env: &mut E,
    hp: &SacHyperparams,
    seed: u64,
    mut on_episode: F,
) -> Result<TrainingReport, MasacError>
where
    E: MultiAgentEnv,
    F: FnMut(&EpisodeRecord),
{
    hp.validate()?;
    let start = Instant::now();
    let layout = JointLayout::of_env(env);
    let n = layout.n_agents();
    let head = hp.policy_head();

    let mut init_rng = stream_rng(seed, stream::NET_INIT);
    let mut explore_rng = stream_rng(seed, stream::EXPLORATION);
    let mut warmup_rng = stream_rng(seed, stream::WARMUP);
    let mut replay_rng = stream_rng(seed, stream::REPLAY);
    let mut update_rng = stream_rng(seed, stream::UPDATE_NOISE);

    let mut nets: Vec<AgentNets> = (0..n)
        .map(|i| AgentNets::new(&layout, i, hp, &mut init_rng))
        .collect();
    let mut buffer: ReplayBuffer<JointTransition<E::Obs, E::Action>> =
        ReplayBuffer::new(hp.buffer_capacity);
    let mut episodes = Vec::with_capacity(hp.episodes);

    for episode in 1..=hp.episodes {
        let mut obs = env.reset();
        let mut agent_rewards = vec![0.0; n];
        for _ in 0..hp.steps_per_episode {
            let warm = buffer.len() < hp.batch_n;
            let actions: Vec<E::Action> = (0..n)
                .map(|i| {
                    let d = layout.act_dims[i];
                    let u: Vec<f64> = if warm {
                        (0..d).map(|_| warmup_rng.random_range(-1.0..=1.0)).collect()
                    } else {
                        let feats = env.features(i, &obs[i]);
                        let noise: Vec<f64> = (0..d)
                            .map(|_| explore_rng.sample(rand_distr::StandardNormal))
                            .collect();
                        sample_policy(&nets[i].actor, &feats, &noise, head)?.action
                    };
                    Ok(env.to_env_action(i, &u))
                })
                .collect::<Result<_, MasacError>>()?;
            let tr = env.step(&actions)?;
            for (acc, r) in agent_rewards.iter_mut().zip(&tr.rewards) {
                *acc += r;
            }
            let done = tr.done;
            buffer.push(JointTransition {
                x: std::mem::replace(&mut obs, tr.next_obs.clone()),
                a: actions,
                r: tr.rewards,
                x_next: tr.next_obs,
                done,
            });

            if buffer.len() >= hp.batch_n {
                for i in 0..n {
                    let items = buffer.sample(hp.batch_n, &mut replay_rng)?;
                    let batch = Batch::from_transitions(env, &items);
                    critic_update(i, &batch, &mut nets, hp, &mut update_rng)
                        .map_err(|e| as_divergence(episode, e))?;
                    actor_update(i, &batch, &mut nets, hp, &mut update_rng)
                        .map_err(|e| as_divergence(episode, e))?;
                }
                if hp.soft_update == SoftUpdateSchedule::PerStep {
                    nets.iter_mut().for_each(|a| soft_update(a, hp.phi_soft));
                }
            }
            if done {
                break;
            }
        }
        if hp.soft_update == SoftUpdateSchedule::PerEpisode && buffer.len() >= hp.batch_n {
            nets.iter_mut().for_each(|a| soft_update(a, hp.phi_soft));
        }
        let total_reward: f64 = agent_rewards.iter().sum();
        if !total_reward.is_finite() {
            return Err(MasacError::Divergence {
                episode,
                agent: usize::MAX,
                what: "reward",
            });
        }
        let rec = EpisodeRecord {
            episode,
            total_reward,
            wall_time_s: start.elapsed().as_secs_f64(),
            agent_rewards,
        };
        on_episode(&rec);
        episodes.push(rec);
    }
    Ok(TrainingReport {
        episodes,
        wall_time_s: start.elapsed().as_secs_f64(),
        agents: nets,
        layout,
        hyperparams: hp.clone(),
        seed,
    })
}

pub fn train<E: MultiAgentEnv>(
    env: &mut E,
    hp: &SacHyperparams,
    seed: u64,
) -> Result<TrainingReport, MasacError> {
    train_with(env, hp, seed, |_| {})
}

/// Trains on a scenario. Episodes last the scenario horizon unless
/// `hp.steps_per_episode` is shorter.
pub fn train_mmg(
    scenario: &Scenario,
    config: EnvConfig,
    hp: &SacHyperparams,
    seed: u64,
) -> Result<TrainingReport, MasacError> {
    let mut task = MmgTask::new(scenario.clone(), config)?;
    train(&mut task, hp, seed)
}

/// Execution-time policy: one actor per agent, each fed only its own
/// observation features.
#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedPolicy {
    actors: Vec<Mlp>,
    head: PolicyHead,
}

impl DecentralizedPolicy {
    pub fn new(actors: Vec<Mlp>, head: PolicyHead) -> Self {
        DecentralizedPolicy { actors, head }
    }

    pub fn from_checkpoints(cks: &[Checkpoint]) -> Result<Self, MasacError> {
        let mut actors = Vec::with_capacity(cks.len());
        let mut head = PolicyHead::default();
        for (i, ck) in cks.iter().enumerate() {
            let agent = ck.meta.get("agent").and_then(|v| v.as_u64());
            if agent != Some(i as u64) {
                return Err(MasacError::Checkpoint(format!(
                    "checkpoint {i} belongs to agent {agent:?}"
                )));
            }
            if let Some(hp) = ck.meta.get("hyperparams") {
                let hp: SacHyperparams = serde_json::from_value(hp.clone())
                    .map_err(|e| MasacError::Checkpoint(e.to_string()))?;
                head = hp.policy_head();
            }
            actors.push(ck.network("actor")?.to_net()?);
        }
        Ok(DecentralizedPolicy { actors, head })
    }

    pub fn n_agents(&self) -> usize {
        self.actors.len()
    }

    pub fn actor(&self, agent: usize) -> &Mlp {
        &self.actors[agent]
    }

    /// Normalized action for one agent from its own features. With `noise`
    /// the action is a policy sample, otherwise `tanh(mean)`.
    pub fn act(&self, agent: usize, local: &[f64], noise: Option<&[f64]>) -> Result<Vec<f64>, MasacError> {
        Ok(match noise {
            Some(e) => sample_policy(&self.actors[agent], local, e, self.head)?.action,
            None => deterministic_action(&self.actors[agent], local)?,
        })
    }
}

/// One executed episode with per-MG costs.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub steps: Vec<StepResult>,
    pub trace: Vec<TraceRow>,
    pub cost_per_mg: Vec<CostBreakdown>,
    pub total_cost: f64,
    pub total_reward: f64,
}

/// Rolls out one episode with decentralized actors. Stochastic rollouts draw
/// noise from the evaluation stream of `seed`.
pub fn evaluate(
    policy: &DecentralizedPolicy,
    scenario: &Scenario,
    config: EnvConfig,
    deterministic: bool,
    seed: u64,
) -> Result<Evaluation, MasacError> {
    let mut task = MmgTask::new(scenario.clone(), config)?;
    let n = task.n_agents();
    if policy.n_agents() != n {
        return Err(MasacError::Checkpoint(format!(
            "policy has {} agents, scenario has {n}",
            policy.n_agents()
        )));
    }
    let mut rng = stream_rng(seed, stream::EVAL);
    let mut obs = task.reset();
    let mut steps = Vec::new();
    let mut trace = Vec::new();
    let mut cost_per_mg = vec![CostBreakdown::default(); n];
    let mut total_reward = 0.0;
    loop {
        let mut actions = Vec::with_capacity(n);
        for (i, o) in obs.iter().enumerate() {
            let local = task.features(i, o);
            let d = task.action_dim(i);
            let u = if deterministic {
                policy.act(i, &local, None)?
            } else {
                let noise: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                policy.act(i, &local, Some(&noise))?
            };
            actions.push(task.to_env_action(i, &u));
        }
        let tr = task.step(&actions)?;
        let res = task.last_step().expect("step recorded").clone();
        for (acc, c) in cost_per_mg.iter_mut().zip(&res.cost) {
            *acc += *c;
        }
        total_reward += res.reward.iter().sum::<f64>();
        trace.extend(trace_rows(&res, scenario));
        steps.push(res);
        obs = tr.next_obs;
        if tr.done {
            break;
        }
    }
    let total_cost = cost_per_mg.iter().map(|c| c.total).sum();
    Ok(Evaluation {
        steps,
        trace,
        cost_per_mg,
        total_cost,
        total_reward,
    })
}
