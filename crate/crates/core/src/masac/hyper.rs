use serde::{Deserialize, Serialize};

use super::MasacError;

/// When target critics are blended toward the live critics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SoftUpdateSchedule {
    /// After every environment step that performed updates.
    #[default]
    PerStep,
    /// Once at the end of every episode.
    PerEpisode,
}

/// Trainer configuration. Defaults are the operating point that trains the
/// bundled two-microgrid scenario in about four minutes on one core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SacHyperparams {
    pub gamma: f64,
    /// Actor learning rate.
    pub a_l: f64,
    /// Critic learning rate.
    pub c_l: f64,
    pub batch_n: usize,
    /// Entropy temperature.
    pub kappa: f64,
    pub phi_soft: f64,
    pub buffer_capacity: usize,
    pub episodes: usize,
    /// Upper bound on steps per episode; the environment may end sooner.
    pub steps_per_episode: usize,
    /// Hidden layer widths shared by actors and critics.
    pub hidden: Vec<usize>,
    /// Multiplier applied to rewards before they enter the critic targets.
    pub reward_scale: f64,
    pub soft_update: SoftUpdateSchedule,
    pub twin_critics: bool,
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl Default for SacHyperparams {
    fn default() -> Self {
        SacHyperparams {
            gamma: 0.916,
            a_l: 4e-4,
            c_l: 6e-4,
            batch_n: 256,
            kappa: 0.01,
            phi_soft: 0.005,
            buffer_capacity: 10_000,
            episodes: 1000,
            steps_per_episode: 24,
            hidden: vec![64, 64],
            reward_scale: 3e-4,
            soft_update: SoftUpdateSchedule::PerStep,
            twin_critics: false,
            log_std_min: -20.0,
            log_std_max: 2.0,
        }
    }
}

impl SacHyperparams {
    pub fn validate(&self) -> Result<(), MasacError> {
        let bad = |what: &str| Err(MasacError::InvalidHyperparams(what.to_string()));
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.a_l > 0.0 && self.a_l.is_finite()) || !(self.c_l > 0.0 && self.c_l.is_finite()) {
            return bad("learning rates must be positive and finite");
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be finite and non-negative");
        }
        if !(self.phi_soft > 0.0 && self.phi_soft <= 1.0) {
            return bad("phi_soft must lie in (0, 1]");
        }
        if self.batch_n == 0 || self.buffer_capacity == 0 || self.batch_n > self.buffer_capacity {
            return bad("need 0 < batch_n <= buffer_capacity");
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1");
        }
        if self.steps_per_episode == 0 {
            return bad("steps_per_episode must be at least 1");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty with positive widths");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be positive and finite");
        }
        if !(self.log_std_min < self.log_std_max) {
            return bad("log_std_min must be below log_std_max");
        }
        Ok(())
    }

    pub fn policy_head(&self) -> crate::neural::PolicyHead {
        crate::neural::PolicyHead {
            log_std_min: self.log_std_min,
            log_std_max: self.log_std_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_valid() {
        let hp = SacHyperparams::default();
        hp.validate().unwrap();
        assert_eq!((hp.gamma, hp.batch_n, hp.kappa), (0.916, 256, 0.01));
    }

    #[test]
    fn rejects_out_of_range() {
        let cases: Vec<Box<dyn Fn(&mut SacHyperparams)>> = vec![
            Box::new(|h| h.gamma = 1.0),
            Box::new(|h| h.a_l = 0.0),
            Box::new(|h| h.kappa = -0.1),
            Box::new(|h| h.phi_soft = 0.0),
            Box::new(|h| h.batch_n = 20_000),
            Box::new(|h| h.episodes = 0),
            Box::new(|h| h.hidden = vec![]),
        ];
        for f in cases {
            let mut hp = SacHyperparams::default();
            f(&mut hp);
            assert!(hp.validate().is_err(), "{hp:?}");
        }
    }

    #[test]
    fn partial_json_fills_defaults() {
        let hp: SacHyperparams = serde_json::from_str(r#"{"gamma":0.5,"soft_update":"per_episode"}"#).unwrap();
        assert_eq!(hp.gamma, 0.5);
        assert_eq!(hp.soft_update, SoftUpdateSchedule::PerEpisode);
        assert_eq!(hp.batch_n, SacHyperparams::default().batch_n);
    }
}
