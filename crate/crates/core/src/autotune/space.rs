use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AutotuneError;
use crate::masac::SacHyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// How one tuned parameter maps from the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Continuous { lo: f64, hi: f64, scale: Scale },
    /// Searched as a continuous log-scale relaxation over `[min, max]`,
    /// snapped to the nearest member in log space.
    Discrete { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Gamma,
    ActorLr,
    CriticLr,
    BatchN,
    Kappa,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Gamma => "gamma",
            Param::ActorLr => "a_l",
            Param::CriticLr => "c_l",
            Param::BatchN => "batch_n",
            Param::Kappa => "kappa",
        }
    }

    fn get(self, hp: &SacHyperparams) -> f64 {
        match self {
            Param::Gamma => hp.gamma,
            Param::ActorLr => hp.a_l,
            Param::CriticLr => hp.c_l,
            Param::BatchN => hp.batch_n as f64,
            Param::Kappa => hp.kappa,
        }
    }

    fn set(self, hp: &mut SacHyperparams, v: f64) {
        match self {
            Param::Gamma => hp.gamma = v,
            Param::ActorLr => hp.a_l = v,
            Param::CriticLr => hp.c_l = v,
            Param::BatchN => hp.batch_n = v.round() as usize,
            Param::Kappa => hp.kappa = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub param: Param,
    pub domain: Domain,
}

impl ParamSpec {
    fn bounds_t(&self) -> (f64, f64) {
        match &self.domain {
            Domain::Continuous { lo, hi, scale: Scale::Linear } => (*lo, *hi),
            Domain::Continuous { lo, hi, scale: Scale::Log } => (lo.ln(), hi.ln()),
            Domain::Discrete { values } => {
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo.ln(), hi.ln())
            }
        }
    }

    fn is_log(&self) -> bool {
        !matches!(self.domain, Domain::Continuous { scale: Scale::Linear, .. })
    }

    /// Unit coordinate to parameter value (snapped for discrete domains).
    pub fn decode(&self, u: f64) -> f64 {
        let (a, b) = self.bounds_t();
        let t = a + u.clamp(0.0, 1.0) * (b - a);
        match &self.domain {
            Domain::Continuous { scale: Scale::Linear, .. } => t,
            Domain::Continuous { lo, hi, scale: Scale::Log } => match u {
                u if u <= 0.0 => *lo,
                u if u >= 1.0 => *hi,
                _ => t.exp().clamp(*lo, *hi),
            },
            Domain::Discrete { values } => *values
                .iter()
                .min_by(|x, y| (x.ln() - t).abs().total_cmp(&(y.ln() - t).abs()))
                .expect("non-empty choice set"),
        }
    }

    /// Parameter value to unit coordinate.
    pub fn encode(&self, v: f64) -> f64 {
        let (a, b) = self.bounds_t();
        let t = if self.is_log() { v.ln() } else { v };
        if b == a {
            return 0.0;
        }
        ((t - a) / (b - a)).clamp(0.0, 1.0)
    }

    fn validate(&self) -> Result<(), String> {
        match &self.domain {
            Domain::Continuous { lo, hi, scale } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(format!("{}: need finite lo < hi", self.param.name()));
                }
                if *scale == Scale::Log && *lo <= 0.0 {
                    return Err(format!("{}: log range must be positive", self.param.name()));
                }
            }
            Domain::Discrete { values } => {
                if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
                    return Err(format!("{}: choices must be non-empty and positive", self.param.name()));
                }
            }
        }
        Ok(())
    }
}

/// The tuned hyperparameters and their ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        let cont = |param, lo, hi, scale| ParamSpec {
            param,
            domain: Domain::Continuous { lo, hi, scale },
        };
        SearchSpace {
            params: vec![
                cont(Param::Gamma, 0.8, 0.999, Scale::Linear),
                cont(Param::ActorLr, 1e-5, 1e-2, Scale::Log),
                cont(Param::CriticLr, 1e-5, 1e-2, Scale::Log),
                ParamSpec {
                    param: Param::BatchN,
                    domain: Domain::Discrete {
                        values: vec![64.0, 128.0, 256.0, 512.0, 1024.0],
                    },
                },
                cont(Param::Kappa, 0.01, 1.0, Scale::Log),
            ],
        }
    }
}

impl SearchSpace {
    /// Number of tuned parameters.
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn validate(&self) -> Result<(), AutotuneError> {
        if self.params.is_empty() {
            return Err(AutotuneError::InvalidSpace("no parameters".into()));
        }
        for p in &self.params {
            p.validate().map_err(AutotuneError::InvalidSpace)?;
        }
        Ok(())
    }

    pub fn decode(&self, u: &[f64]) -> Vec<f64> {
        self.params.iter().zip(u).map(|(p, &x)| p.decode(x)).collect()
    }

    pub fn encode(&self, values: &[f64]) -> Vec<f64> {
        self.params.iter().zip(values).map(|(p, &v)| p.encode(v)).collect()
    }

    /// Moves a unit point onto the position of the value it decodes to.
    pub fn snap(&self, u: &[f64]) -> Vec<f64> {
        self.encode(&self.decode(u))
    }

    pub fn apply(&self, base: &SacHyperparams, values: &[f64]) -> SacHyperparams {
        let mut hp = base.clone();
        for (p, &v) in self.params.iter().zip(values) {
            p.param.set(&mut hp, v);
        }
        hp
    }

    pub fn values_of(&self, hp: &SacHyperparams) -> Vec<f64> {
        self.params.iter().map(|p| p.param.get(hp)).collect()
    }

    /// Unit-cube position of a configuration.
    pub fn locate(&self, hp: &SacHyperparams) -> Vec<f64> {
        self.encode(&self.values_of(hp))
    }
}

/// `(D!)^(U−1)`, saturating at `u128::MAX`.
pub fn bootstrap_count(d: u32, u: u32) -> u128 {
    assert!(d >= 1 && u >= 1, "need D >= 1 and U >= 1");
    let mut fact: u128 = 1;
    for k in 2..=d as u128 {
        fact = fact.saturating_mul(k);
    }
    let mut out: u128 = 1;
    for _ in 0..u - 1 {
        out = out.saturating_mul(fact);
    }
    out
}

/// Latin hypercube design in `[0, 1]^dim`: in every dimension each of the
/// `n` equal strata holds exactly one point.
pub fn lhs_unit<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..dim {
        perm.shuffle(rng);
        for (i, p) in pts.iter_mut().enumerate() {
            p[k] = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

/// `n` stratified configurations, decoded to parameter values.
pub fn lhs_sample(space: &SearchSpace, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = crate::rng::stream_rng(seed, crate::rng::stream::LHS);
    lhs_unit(space.dim(), n, &mut rng)
        .iter()
        .map(|u| space.decode(u))
        .collect()
}
