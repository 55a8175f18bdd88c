//! Seeded synthetic day profiles standing in for measured wind, solar and load
//! data.
//!
//! Even-indexed microgrids are load-heavy (net deficit over the day) and
//! odd-indexed ones renewable-heavy (net surplus). Prices follow a
//! three-tier day profile with the inter-MG price at the midpoint between
//! grid sell and buy prices.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DomainError, MicrogridParams, ParamSet, Scenario};
use crate::rng::{stream, stream_rng};

/// Grid buy/sell prices ($/kWh) for the off-peak, shoulder and peak tiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceTiers {
    pub buy: [f64; 3],
    pub sell: [f64; 3],
}

impl Default for PriceTiers {
    fn default() -> Self {
        PriceTiers {
            buy: [0.55, 0.85, 1.20],
            sell: [0.25, 0.30, 0.40],
        }
    }
}

impl PriceTiers {
    /// 0 = off-peak, 1 = shoulder, 2 = peak.
    fn tier(hour: f64) -> usize {
        let h = hour.rem_euclid(24.0);
        if !(7.0..23.0).contains(&h) {
            0
        } else if (10.0..15.0).contains(&h) || (18.0..22.0).contains(&h) {
            2
        } else {
            1
        }
    }
}

struct Profile {
    load_peak: f64,
    wt_cap: f64,
    pv_cap: f64,
}

const DEFICIT: Profile = Profile {
    load_peak: 380.0,
    wt_cap: 120.0,
    pv_cap: 80.0,
};

const SURPLUS: Profile = Profile {
    load_peak: 170.0,
    wt_cap: 300.0,
    pv_cap: 200.0,
};

fn load_shape(h: f64) -> f64 {
    let bump = |c: f64, w: f64| (-(h - c).powi(2) / w).exp();
    (0.55 + 0.25 * bump(9.0, 8.0) + 0.45 * bump(19.0, 6.0)).min(1.0)
}

fn pv_shape(h: f64) -> f64 {
    if (6.0..=18.0).contains(&h) {
        (PI * (h - 6.0) / 12.0).sin().max(0.0)
    } else {
        0.0
    }
}

/// Synthetic scenario with reference parameters and default prices.
pub fn generate_synthetic(seed: u64, n_mg: usize, horizon_t: usize) -> Result<Scenario, DomainError> {
    generate_synthetic_with(seed, n_mg, horizon_t, ParamSet::Table1, PriceTiers::default())
}

pub fn generate_synthetic_with(
    seed: u64,
    n_mg: usize,
    horizon_t: usize,
    param_set: ParamSet,
    tiers: PriceTiers,
) -> Result<Scenario, DomainError> {
    if n_mg < 2 {
        return Err(DomainError::Invalid(format!(
            "synthetic scenarios need n_mg >= 2, got {n_mg}"
        )));
    }
    if horizon_t == 0 {
        return Err(DomainError::Invalid("horizon_t must be at least 1".into()));
    }
    let dt = 1.0;
    let mut rng = stream_rng(seed, stream::SCENARIO);
    let mut noise = |scale: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        1.0 + scale * z.clamp(-3.0, 3.0)
    };

    let mut load = Vec::with_capacity(n_mg);
    let mut p_wt = Vec::with_capacity(n_mg);
    let mut p_pv = Vec::with_capacity(n_mg);
    for mg in 0..n_mg {
        let profile = if mg % 2 == 0 { &DEFICIT } else { &SURPLUS };
        let phase = 2.0 * PI * (mg as f64) / (n_mg as f64);
        let mut wind_state = 0.0_f64;
        let (mut l, mut w, mut p) = (vec![], vec![], vec![]);
        for t in 0..horizon_t {
            let h = (t as f64 * dt).rem_euclid(24.0);
            // AR(1) wind anomaly on top of a slow daily cycle
            wind_state = 0.7 * wind_state + 0.3 * (noise(1.0) - 1.0);
            let wind = 0.5 + 0.25 * (2.0 * PI * (h - 3.0) / 24.0 + phase).cos() + 0.2 * wind_state;
            l.push(profile.load_peak * load_shape(h) * noise(0.05).max(0.5));
            w.push((profile.wt_cap * wind).clamp(0.0, profile.wt_cap));
            p.push(profile.pv_cap * pv_shape(h) * noise(0.08).max(0.0));
        }
        load.push(l);
        p_wt.push(w);
        p_pv.push(p);
    }

    // Enforce the surplus/deficit roles over the horizon.
    for mg in 0..n_mg {
        let total_load: f64 = load[mg].iter().sum();
        let total_ren: f64 = p_wt[mg].iter().chain(p_pv[mg].iter()).sum();
        if mg % 2 == 0 && total_load <= total_ren {
            let f = 0.8 * total_load / total_ren.max(f64::MIN_POSITIVE);
            p_wt[mg].iter_mut().chain(p_pv[mg].iter_mut()).for_each(|v| *v *= f);
        } else if mg % 2 == 1 && total_load >= total_ren {
            let f = 0.8 * total_ren / total_load.max(f64::MIN_POSITIVE);
            load[mg].iter_mut().for_each(|v| *v *= f);
        }
    }

    let mut price_mg = Vec::with_capacity(horizon_t);
    let mut price_grid_buy = Vec::with_capacity(horizon_t);
    let mut price_grid_sell = Vec::with_capacity(horizon_t);
    for t in 0..horizon_t {
        let k = PriceTiers::tier(t as f64 * dt);
        let (buy, sell) = (tiers.buy[k], tiers.sell[k]);
        price_grid_buy.push(buy);
        price_grid_sell.push(sell);
        price_mg.push(0.5 * (buy + sell));
    }

    let scenario = Scenario {
        n_mg,
        horizon_t,
        dt,
        load,
        p_wt,
        p_pv,
        price_mg,
        price_grid_buy,
        price_grid_sell,
        params: (0..n_mg).map(|mg| MicrogridParams::preset(param_set, mg)).collect(),
    };
    scenario.validate()?;
    Ok(scenario)
}
