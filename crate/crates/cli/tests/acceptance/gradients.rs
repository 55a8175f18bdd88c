//! Central finite differences against backpropagation, and the squashed
//! Gaussian density.

use mmg_core::masac::{actor_loss_grad, critic_input, critic_loss_grad, Batch};
use mmg_core::neural::{squashed_log_prob, Mlp, PolicyHead};
use mmg_core::rng::stream_rng;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::common::ok;
use crate::Outcome;

const REL_TOL: f64 = 1e-4;
const ABS_FLOOR: f64 = 1e-7;
const H: f64 = 1e-6;
const INSTANCES: u64 = 20;

fn normal<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Compares `analytic` with central differences of `loss` over every
/// parameter; returns the worst relative error seen.
fn fd_params(net: &Mlp, analytic: &[f64], loss: impl Fn(&Mlp) -> f64) -> Result<f64, String> {
    let flat = net.params_flat();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut p = flat.clone();
        p[i] += H;
        probe.set_params_flat(&p);
        let up = loss(&probe);
        p[i] -= 2.0 * H;
        probe.set_params_flat(&p);
        let numeric = (up - loss(&probe)) / (2.0 * H);
        let err = (analytic[i] - numeric).abs();
        let scale = analytic[i].abs().max(numeric.abs());
        if err > (REL_TOL * scale).max(ABS_FLOOR) {
            return Err(format!("parameter {i}: analytic {} vs numeric {numeric}", analytic[i]));
        }
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
    }
    Ok(worst)
}

fn random_sizes<R: Rng>(rng: &mut R, input: usize, output: usize) -> Vec<usize> {
    let mut sizes = vec![input];
    for _ in 0..rng.random_range(1..4) {
        sizes.push(rng.random_range(1..9));
    }
    sizes.push(output);
    sizes
}

fn random_batch<R: Rng>(obs_dims: &[usize], act_dims: &[usize], b: usize, rng: &mut R) -> Batch {
    let obs = obs_dims.iter().map(|&d| normal(d, b, rng)).collect();
    let next_obs = obs_dims.iter().map(|&d| normal(d, b, rng)).collect();
    let actions = act_dims
        .iter()
        .map(|&d| DMatrix::from_fn(d, b, |_, _| rng.random_range(-0.95..0.95)))
        .collect();
    Batch { obs, actions, next_obs, rewards: normal(obs_dims.len(), b, rng), done: vec![false; b] }
}

fn forward_instances() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = stream_rng(seed, 300);
        let (input, output) = (rng.random_range(1..7), rng.random_range(1..5));
        let sizes = random_sizes(&mut rng, input, output);
        let net = Mlp::new(&sizes, &mut rng);
        let b = rng.random_range(1..5);
        let x = normal(sizes[0], b, &mut rng);
        let c = normal(*sizes.last().unwrap(), b, &mut rng);
        let cache = ok(net.forward_cached(&x), "forward")?;
        let (grads, dx) = ok(net.backward(&cache, &c), "backward")?;
        let weighted = |n: &Mlp, x: &DMatrix<f64>| n.forward(x).unwrap().component_mul(&c).sum();
        worst = worst.max(fd_params(&net, &grads.flat(), |n| weighted(n, &x))?);
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += H;
            let up = weighted(&net, &xp);
            xp[i] -= 2.0 * H;
            let numeric = (up - weighted(&net, &xp)) / (2.0 * H);
            let scale = dx[i].abs().max(numeric.abs());
            if (dx[i] - numeric).abs() > (REL_TOL * scale).max(ABS_FLOOR) {
                return Err(format!("input {i}: {} vs {numeric}", dx[i]));
            }
        }
    }
    Ok(worst)
}

fn critic_instances() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = stream_rng(seed, 301);
        let n = rng.random_range(1..4);
        let obs_dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..5)).collect();
        let act_dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..4)).collect();
        let b = rng.random_range(1..6);
        let batch = random_batch(&obs_dims, &act_dims, b, &mut rng);
        let refs: Vec<&DMatrix<f64>> = batch.actions.iter().collect();
        let input = critic_input(&batch.obs, &refs);
        let critic = Mlp::new(&random_sizes(&mut rng, input.nrows(), 1), &mut rng);
        let w: Vec<f64> = (0..b).map(|_| rng.sample(StandardNormal)).collect();
        let (_, g) = ok(critic_loss_grad(&critic, &input, &w), "critic loss")?;
        worst = worst.max(fd_params(&critic, &g.flat(), |c| critic_loss_grad(c, &input, &w).unwrap().0)?);
    }
    Ok(worst)
}

fn actor_instances() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = stream_rng(seed, 302);
        let n = rng.random_range(1..4);
        let agent = rng.random_range(0..n);
        let obs_dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..5)).collect();
        let act_dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..4)).collect();
        let b = rng.random_range(1..6);
        let batch = random_batch(&obs_dims, &act_dims, b, &mut rng);
        let in_dim = obs_dims.iter().sum::<usize>() + act_dims.iter().sum::<usize>();
        let c1 = Mlp::new(&random_sizes(&mut rng, in_dim, 1), &mut rng);
        let c2 = Mlp::new(&random_sizes(&mut rng, in_dim, 1), &mut rng);
        let critics: Vec<&Mlp> = if seed % 2 == 0 { vec![&c1] } else { vec![&c1, &c2] };
        let actor = Mlp::new(&random_sizes(&mut rng, obs_dims[agent], 2 * act_dims[agent]), &mut rng);
        let noise = normal(act_dims[agent], b, &mut rng);
        let kappa = rng.random_range(0.01..1.0);
        let head = PolicyHead::default();
        let (_, g) = ok(actor_loss_grad(agent, &actor, &critics, &batch, &noise, kappa, head), "actor loss")?;
        worst = worst.max(fd_params(&actor, &g.flat(), |a| {
            actor_loss_grad(agent, a, &critics, &batch, &noise, kappa, head).unwrap().0
        })?);
    }
    Ok(worst)
}

pub fn check() -> Outcome {
    let f = forward_instances().map_err(|e| format!("network: {e}"))?;
    let c = critic_instances().map_err(|e| format!("critic loss: {e}"))?;
    let a = actor_instances().map_err(|e| format!("actor loss: {e}"))?;
    Ok(format!(
        "{INSTANCES} instances each; worst relative error network {f:.1e}, critic {c:.1e}, actor {a:.1e}"
    ))
}

/// Midpoint rule over the open action interval.
pub fn density() -> Outcome {
    let n = 400_000;
    let h = 2.0 / n as f64;
    let mut worst: f64 = 0.0;
    for (m, ls) in [(0.0, 0.0), (0.3, -0.2), (-0.8, 0.1), (0.0, -1.5), (1.2, -0.5)] {
        let s = f64::exp(ls);
        let total: f64 = (0..n)
            .map(|i| {
                let a = -1.0 + (i as f64 + 0.5) * h;
                let e = (a.atanh() - m) / s;
                squashed_log_prob(&[m], &[ls], &[e]).exp() * h
            })
            .sum();
        if (total - 1.0).abs() > 1e-3 {
            return Err(format!("mean {m}, log-std {ls}: integral {total}"));
        }
        worst = worst.max((total - 1.0).abs());
    }
    Ok(format!("5 densities integrate to 1 within {worst:.1e}"))
}
