use nalgebra::{Cholesky, DMatrix, DVector};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::AutotuneError;

/// Kernel hyperparameter grids searched by marginal likelihood. Targets are
/// standardized before fitting, so signal variances are relative to the
/// sample variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub length_scales: Vec<f64>,
    pub signal_variances: Vec<f64>,
    pub noise_variances: Vec<f64>,
    /// Added to every noise level to keep the factorization well conditioned.
    pub noise_floor: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            length_scales: vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.5],
            signal_variances: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            noise_variances: vec![1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.2],
            noise_floor: 1e-10,
        }
    }
}

impl GpConfig {
    /// Noise-free variant used when the targets should be interpolated.
    pub fn interpolating() -> Self {
        GpConfig {
            noise_variances: vec![0.0],
            ..GpConfig::default()
        }
    }
}

/// Gaussian process with a squared-exponential kernel and constant prior
/// mean (the sample mean of the targets).
#[derive(Debug, Clone)]
pub struct GpModel {
    x: Vec<Vec<f64>>,
    y_mean: f64,
    y_scale: f64,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    chol: Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    pub log_marginal_likelihood: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kernel(a: &[f64], b: &[f64], length: f64, signal: f64) -> f64 {
    signal * (-0.5 * sq_dist(a, b) / (length * length)).exp()
}

/// Fits on inputs in the unit cube and maximization targets.
pub fn gp_fit(x: &[Vec<f64>], y: &[f64], cfg: &GpConfig) -> Result<GpModel, AutotuneError> {
    if x.len() != y.len() {
        return Err(AutotuneError::Gp(format!("{} inputs, {} targets", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(AutotuneError::InsufficientData { have: x.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(AutotuneError::Gp("non-finite target".into()));
    }
    if x.iter().all(|p| sq_dist(p, &x[0]) == 0.0) {
        return Err(AutotuneError::DegenerateDesign);
    }
    let n = x.len();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let ys = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_scale));

    let d2 = DMatrix::from_fn(n, n, |i, j| sq_dist(&x[i], &x[j]));
    let mut best: Option<GpModel> = None;
    for &l in &cfg.length_scales {
        let base = d2.map(|d| (-0.5 * d / (l * l)).exp());
        for &s in &cfg.signal_variances {
            for &nv in &cfg.noise_variances {
                let noise = nv + cfg.noise_floor;
                let mut k = &base * s;
                for i in 0..n {
                    k[(i, i)] += noise;
                }
                let Some(chol) = Cholesky::new(k) else { continue };
                let alpha = chol.solve(&ys);
                let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let lml = -0.5 * ys.dot(&alpha)
                    - log_det
                    - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
                if !lml.is_finite() {
                    continue;
                }
                if best.as_ref().is_none_or(|b| lml > b.log_marginal_likelihood) {
                    best = Some(GpModel {
                        x: x.to_vec(),
                        y_mean,
                        y_scale,
                        length_scale: l,
                        signal_variance: s,
                        noise_variance: noise,
                        chol,
                        alpha,
                        log_marginal_likelihood: lml,
                    });
                }
            }
        }
    }
    best.ok_or_else(|| AutotuneError::Gp("no kernel setting gave a positive definite covariance".into()))
}

impl GpModel {
    pub fn n_train(&self) -> usize {
        self.x.len()
    }

    pub fn prior_mean(&self) -> f64 {
        self.y_mean
    }

    /// Prior variance of the latent function in target units.
    pub fn prior_variance(&self) -> f64 {
        self.signal_variance * self.y_scale * self.y_scale
    }

    /// Posterior mean and latent-function variance at `q`, in target units.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let k = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|p| kernel(p, q, self.length_scale, self.signal_variance)),
        );
        let mean = k.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&k).unwrap_or_else(|| k.clone());
        let var = (self.signal_variance - v.dot(&v)).max(0.0);
        (
            self.y_mean + self.y_scale * mean,
            var * self.y_scale * self.y_scale,
        )
    }
}

/// Expected improvement over `best` for maximization.
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    let gain = mean - best;
    if sigma <= 0.0 || !sigma.is_finite() {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let n = Normal::standard();
    (gain * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}
