use nalgebra::DMatrix;

use super::{ForwardCache, Mlp, MlpGrads, NeuralError};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Clamp range for the actor's log-standard-deviation outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyHead {
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl Default for PolicyHead {
    fn default() -> Self {
        PolicyHead {
            log_std_min: -20.0,
            log_std_max: 2.0,
        }
    }
}

/// One reparameterized draw for a single observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    /// Squashed action in `(-1, 1)^d`.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

/// Batched draw with everything the backward pass needs. All matrices are
/// `d × B`.
#[derive(Debug, Clone)]
pub struct BatchPolicy {
    pub cache: ForwardCache,
    pub noise: DMatrix<f64>,
    pub std: DMatrix<f64>,
    pub action: DMatrix<f64>,
    pub log_prob: Vec<f64>,
    /// 1.0 where the raw log-std lies inside the clamp range, else 0.0.
    pub log_std_active: DMatrix<f64>,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln(1 − tanh²(u))` without cancellation for large `|u|`.
fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Log-density of `tanh(mean + exp(log_std)·noise)` under the squashed
/// diagonal Gaussian.
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], noise: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(noise)
        .map(|((&m, &ls), &e)| {
            let u = m + ls.exp() * e;
            -0.5 * e * e - ls - HALF_LN_2PI - log_one_minus_tanh_sq(u)
        })
        .sum()
}

/// Runs the actor on a batch of observations (`obs_dim × B`) with the given
/// standard-normal noise (`d × B`).
pub fn policy_batch(
    actor: &Mlp,
    obs: &DMatrix<f64>,
    noise: &DMatrix<f64>,
    head: PolicyHead,
) -> Result<BatchPolicy, NeuralError> {
    let d = actor.output_dim() / 2;
    if actor.output_dim() != 2 * d || noise.nrows() != d || noise.ncols() != obs.ncols() {
        return Err(NeuralError::Shape {
            expected: format!("noise {}×{}", d, obs.ncols()),
            found: format!("{}×{}", noise.nrows(), noise.ncols()),
        });
    }
    let cache = actor.forward_cached(obs)?;
    let out = cache.output();
    let b = obs.ncols();
    let mut std = DMatrix::zeros(d, b);
    let mut action = DMatrix::zeros(d, b);
    let mut active = DMatrix::zeros(d, b);
    let mut log_prob = vec![0.0; b];
    for j in 0..b {
        let mut lp = 0.0;
        for k in 0..d {
            let m = out[(k, j)];
            let raw = out[(d + k, j)];
            let ls = raw.clamp(head.log_std_min, head.log_std_max);
            if raw > head.log_std_min && raw < head.log_std_max {
                active[(k, j)] = 1.0;
            }
            let s = ls.exp();
            let e = noise[(k, j)];
            let u = m + s * e;
            std[(k, j)] = s;
            action[(k, j)] = u.tanh();
            lp += -0.5 * e * e - ls - HALF_LN_2PI - log_one_minus_tanh_sq(u);
        }
        log_prob[j] = lp;
    }
    Ok(BatchPolicy {
        cache,
        noise: noise.clone(),
        std,
        action,
        log_prob,
        log_std_active: active,
    })
}

/// Single-observation convenience wrapper around [`policy_batch`].
pub fn sample_policy(
    actor: &Mlp,
    obs: &[f64],
    noise: &[f64],
    head: PolicyHead,
) -> Result<PolicySample, NeuralError> {
    let bp = policy_batch(
        actor,
        &DMatrix::from_column_slice(obs.len(), 1, obs),
        &DMatrix::from_column_slice(noise.len(), 1, noise),
        head,
    )?;
    let d = noise.len();
    let out = bp.cache.output();
    Ok(PolicySample {
        action: bp.action.as_slice().to_vec(),
        log_prob: bp.log_prob[0],
        mean: (0..d).map(|k| out[(k, 0)]).collect(),
        log_std: (0..d)
            .map(|k| out[(d + k, 0)].clamp(head.log_std_min, head.log_std_max))
            .collect(),
    })
}

/// Deterministic action `tanh(mean)` used at evaluation time.
pub fn deterministic_action(actor: &Mlp, obs: &[f64]) -> Result<Vec<f64>, NeuralError> {
    let out = actor.forward_one(obs)?;
    let d = out.len() / 2;
    Ok(out[..d].iter().map(|m| m.tanh()).collect())
}

/// Parameter gradients of `L = Σ_j [⟨d_action_j, a_j⟩ + d_log_prob_j·logπ_j]`
/// with the noise held fixed.
pub fn policy_backward(
    actor: &Mlp,
    bp: &BatchPolicy,
    d_action: &DMatrix<f64>,
    d_log_prob: &[f64],
) -> Result<MlpGrads, NeuralError> {
    let (d, b) = bp.action.shape();
    if d_action.shape() != (d, b) || d_log_prob.len() != b {
        return Err(NeuralError::Shape {
            expected: format!("{d}×{b} and {b}"),
            found: format!("{:?} and {}", d_action.shape(), d_log_prob.len()),
        });
    }
    let mut up = DMatrix::zeros(2 * d, b);
    for j in 0..b {
        let glp = d_log_prob[j];
        for k in 0..d {
            let a = bp.action[(k, j)];
            // ∂a/∂u = 1 − a², ∂logπ/∂u = 2a, ∂logπ/∂ls|_u = −1, ∂u/∂ls = σε
            let d_u = d_action[(k, j)] * (1.0 - a * a) + glp * 2.0 * a;
            let d_ls = d_u * bp.std[(k, j)] * bp.noise[(k, j)] - glp;
            up[(k, j)] = d_u;
            up[(d + k, j)] = d_ls * bp.log_std_active[(k, j)];
        }
    }
    Ok(actor.backward(&bp.cache, &up)?.0)
}
