//! Finite-difference checks for the critic and actor losses.

use mmg_core::masac::{actor_loss_grad, critic_input, critic_loss_grad, Batch};
use mmg_core::neural::{Mlp, PolicyHead};
use mmg_core::rng::stream_rng;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

const REL_TOL: f64 = 1e-4;
const ABS_FLOOR: f64 = 1e-7;
const H: f64 = 1e-6;

fn close(analytic: f64, numeric: f64) -> bool {
    let scale = analytic.abs().max(numeric.abs());
    (analytic - numeric).abs() <= (REL_TOL * scale).max(ABS_FLOOR)
}

fn normal<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_batch<R: Rng>(obs_dims: &[usize], act_dims: &[usize], b: usize, rng: &mut R) -> Batch {
    let obs = obs_dims.iter().map(|&d| normal(d, b, rng)).collect();
    let next_obs = obs_dims.iter().map(|&d| normal(d, b, rng)).collect();
    let actions = act_dims
        .iter()
        .map(|&d| DMatrix::from_fn(d, b, |_, _| rng.random_range(-0.95..0.95)))
        .collect();
    Batch {
        obs,
        actions,
        next_obs,
        rewards: normal(obs_dims.len(), b, rng),
        done: vec![false; b],
    }
}

fn fd_check(net: &Mlp, analytic: &[f64], loss: impl Fn(&Mlp) -> f64) {
    let flat = net.params_flat();
    let mut probe = net.clone();
    for i in 0..flat.len() {
        let mut p = flat.clone();
        p[i] += H;
        probe.set_params_flat(&p);
        let up = loss(&probe);
        p[i] -= 2.0 * H;
        probe.set_params_flat(&p);
        let numeric = (up - loss(&probe)) / (2.0 * H);
        assert!(close(analytic[i], numeric), "param {i}: {} vs {numeric}", analytic[i]);
    }
}

#[test]
fn critic_loss_gradient() {
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 50);
        let obs_dims = [rng.random_range(1..4), rng.random_range(1..4)];
        let act_dims = [rng.random_range(1..3), rng.random_range(1..3)];
        let b = rng.random_range(1..6);
        let batch = random_batch(&obs_dims, &act_dims, b, &mut rng);
        let refs: Vec<&DMatrix<f64>> = batch.actions.iter().collect();
        let input = critic_input(&batch.obs, &refs);
        let critic = Mlp::new(&[input.nrows(), 6, 5, 1], &mut rng);
        let targets: Vec<f64> = (0..b).map(|_| rng.sample(StandardNormal)).collect();
        let (_, grads) = critic_loss_grad(&critic, &input, &targets).unwrap();
        fd_check(&critic, &grads.flat(), |c| critic_loss_grad(c, &input, &targets).unwrap().0);
    }
}

#[test]
fn actor_loss_gradient() {
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 51);
        let obs_dims = [rng.random_range(1..4), rng.random_range(1..4)];
        let act_dims = [rng.random_range(1..3), rng.random_range(1..3)];
        let b = rng.random_range(1..6);
        let agent = (seed % 2) as usize;
        let batch = random_batch(&obs_dims, &act_dims, b, &mut rng);
        let in_dim = obs_dims.iter().sum::<usize>() + act_dims.iter().sum::<usize>();
        let twin = seed % 3 == 0;
        let c1 = Mlp::new(&[in_dim, 7, 1], &mut rng);
        let c2 = Mlp::new(&[in_dim, 7, 1], &mut rng);
        let critics: Vec<&Mlp> = if twin { vec![&c1, &c2] } else { vec![&c1] };
        let actor = Mlp::new(&[obs_dims[agent], 6, 2 * act_dims[agent]], &mut rng);
        let noise = normal(act_dims[agent], b, &mut rng);
        let kappa = rng.random_range(0.01..1.0);
        let head = PolicyHead::default();
        let (_, grads) = actor_loss_grad(agent, &actor, &critics, &batch, &noise, kappa, head).unwrap();
        fd_check(&actor, &grads.flat(), |a| {
            actor_loss_grad(agent, a, &critics, &batch, &noise, kappa, head).unwrap().0
        });
    }
}
