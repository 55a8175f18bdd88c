use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::domain::MicrogridParams;

/// Relative slack allowed when checking storage bounds after float arithmetic.
const CAPACITY_SLACK: f64 = 1e-9;

/// Energy held by one storage device (kWh).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageState {
    pub s_esd: f64,
}

/// Charge/discharge decided for one step and the power the storage could
/// not absorb.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EsdDispatch {
    pub p_ch: f64,
    pub p_dc: f64,
    pub leftover: f64,
    /// Discharge (kW) still needed to reach `s_esd_min` at the end of the
    /// horizon but blocked by `p_dc_max`. Zero except on the terminal step.
    pub terminal_shortfall: f64,
}

/// Advances storage by one step:
/// `s' = s + (η_ch·p_ch − p_dc/η_dc)·dt`.
pub fn esd_step(
    state: StorageState,
    p_ch: f64,
    p_dc: f64,
    params: &MicrogridParams,
    dt: f64,
) -> Result<StorageState, EnvError> {
    if !(0.0..=params.p_ch_max).contains(&p_ch) {
        return Err(EnvError::OutOfBounds {
            what: "p_ch",
            value: p_ch,
            lo: 0.0,
            hi: params.p_ch_max,
        });
    }
    if !(0.0..=params.p_dc_max).contains(&p_dc) {
        return Err(EnvError::OutOfBounds {
            what: "p_dc",
            value: p_dc,
            lo: 0.0,
            hi: params.p_dc_max,
        });
    }
    let next = state.s_esd + (params.eta_ch * p_ch - p_dc / params.eta_dc) * dt;
    let slack = CAPACITY_SLACK * params.s_esd_max.max(1.0);
    if next < params.s_esd_min - slack || next > params.s_esd_max + slack {
        return Err(EnvError::OutOfBounds {
            what: "s_esd",
            value: next,
            lo: params.s_esd_min,
            hi: params.s_esd_max,
        });
    }
    Ok(StorageState {
        s_esd: next.clamp(params.s_esd_min, params.s_esd_max),
    })
}

/// State of charge, `s / s_max`.
pub fn soc(state: StorageState, params: &MicrogridParams) -> f64 {
    state.s_esd / params.s_esd_max
}

fn max_charge(state: StorageState, params: &MicrogridParams, dt: f64) -> f64 {
    let headroom = (params.s_esd_max - state.s_esd).max(0.0);
    params.p_ch_max.min(headroom / (params.eta_ch * dt))
}

fn max_discharge(state: StorageState, params: &MicrogridParams, dt: f64) -> f64 {
    let available = (state.s_esd - params.s_esd_min).max(0.0);
    params.p_dc_max.min(available * params.eta_dc / dt)
}

/// Rule-based absorption of the residual power: a surplus charges, a deficit
/// discharges, each limited by power rating and stored energy.
pub fn clip_esd(
    residual: f64,
    state: StorageState,
    params: &MicrogridParams,
    dt: f64,
) -> EsdDispatch {
    if residual > 0.0 {
        let p_ch = residual.min(max_charge(state, params, dt));
        EsdDispatch {
            p_ch,
            leftover: residual - p_ch,
            ..Default::default()
        }
    } else if residual < 0.0 {
        let p_dc = (-residual).min(max_discharge(state, params, dt));
        EsdDispatch {
            p_dc,
            leftover: residual + p_dc,
            ..Default::default()
        }
    } else {
        EsdDispatch::default()
    }
}

/// Explicit storage command (kW, positive = charge), clipped to what the
/// device can do this step.
pub fn command_esd(
    residual: f64,
    command: f64,
    state: StorageState,
    params: &MicrogridParams,
    dt: f64,
) -> EsdDispatch {
    let (p_ch, p_dc) = if command > 0.0 {
        (command.min(max_charge(state, params, dt)), 0.0)
    } else if command < 0.0 {
        (0.0, (-command).min(max_discharge(state, params, dt)))
    } else {
        (0.0, 0.0)
    };
    EsdDispatch {
        p_ch,
        p_dc,
        leftover: residual - p_ch + p_dc,
        terminal_shortfall: 0.0,
    }
}

/// Last-step rule: discharge toward `s_esd_min` within `p_dc_max`; whatever
/// cannot be discharged is reported as `terminal_shortfall` and counted
/// against the balance.
pub fn terminal_esd(
    residual: f64,
    state: StorageState,
    params: &MicrogridParams,
    dt: f64,
) -> EsdDispatch {
    let required = (state.s_esd - params.s_esd_min).max(0.0) * params.eta_dc / dt;
    let p_dc = required.min(params.p_dc_max);
    let terminal_shortfall = required - p_dc;
    EsdDispatch {
        p_ch: 0.0,
        p_dc,
        leftover: residual + p_dc - terminal_shortfall,
        terminal_shortfall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MicrogridParams {
        MicrogridParams::table1(0)
    }

    #[test]
    fn storage_dynamics() {
        let p = params();
        let s = esd_step(StorageState { s_esd: 100.0 }, 50.0, 0.0, &p, 1.0).unwrap();
        assert!((s.s_esd - 145.0).abs() < 1e-9);
        let s = esd_step(s, 0.0, 45.0, &p, 1.0).unwrap();
        assert!((s.s_esd - 95.0).abs() < 1e-9);
        let s = esd_step(StorageState { s_esd: 100.0 }, 0.0, 0.0, &p, 1.0).unwrap();
        assert_eq!(s.s_esd, 100.0);
    }

    #[test]
    fn storage_rejects_bound_violations() {
        let p = params();
        assert!(esd_step(StorageState { s_esd: 100.0 }, 101.0, 0.0, &p, 1.0).is_err());
        assert!(esd_step(StorageState { s_esd: 100.0 }, 0.0, -1.0, &p, 1.0).is_err());
        assert!(esd_step(StorageState { s_esd: 190.0 }, 100.0, 0.0, &p, 1.0).is_err());
        assert!(esd_step(StorageState { s_esd: 10.0 }, 0.0, 50.0, &p, 1.0).is_err());
    }

    #[test]
    fn state_of_charge() {
        let p = params();
        assert_eq!(soc(StorageState { s_esd: 100.0 }, &p), 0.5);
        assert_eq!(soc(StorageState { s_esd: 200.0 }, &p), 1.0);
        assert_eq!(soc(StorageState { s_esd: 0.0 }, &p), 0.0);
    }

    #[test]
    fn clip_power_cap_binds() {
        // headroom 100 kWh would allow 111.1 kW; the 100 kW rating binds
        let d = clip_esd(120.0, StorageState { s_esd: 100.0 }, &params(), 1.0);
        assert_eq!(d.p_ch, 100.0);
        assert_eq!(d.p_dc, 0.0);
        assert!((d.leftover - 20.0).abs() < 1e-12);
    }

    #[test]
    fn clip_headroom_binds() {
        let d = clip_esd(120.0, StorageState { s_esd: 155.0 }, &params(), 1.0);
        assert!((d.p_ch - 50.0).abs() < 1e-9);
        let s = esd_step(StorageState { s_esd: 155.0 }, d.p_ch, d.p_dc, &params(), 1.0).unwrap();
        assert!((s.s_esd - 200.0).abs() < 1e-9);
    }

    #[test]
    fn clip_identity_and_empty_store() {
        assert_eq!(
            clip_esd(0.0, StorageState { s_esd: 50.0 }, &params(), 1.0),
            EsdDispatch::default()
        );
        let d = clip_esd(-50.0, StorageState { s_esd: 0.0 }, &params(), 1.0);
        assert_eq!((d.p_ch, d.p_dc, d.leftover), (0.0, 0.0, -50.0));
    }

    #[test]
    fn clip_discharge_limited_by_energy() {
        // 30 kWh stored, η_dc = 0.9 → at most 27 kW for one hour
        let d = clip_esd(-80.0, StorageState { s_esd: 30.0 }, &params(), 1.0);
        assert!((d.p_dc - 27.0).abs() < 1e-12);
        assert!((d.leftover + 53.0).abs() < 1e-12);
    }

    #[test]
    fn terminal_rule() {
        let p = params();
        // 45 kWh → 40.5 kW discharge empties it
        let d = terminal_esd(10.0, StorageState { s_esd: 45.0 }, &p, 1.0);
        assert!((d.p_dc - 40.5).abs() < 1e-12);
        assert_eq!(d.terminal_shortfall, 0.0);
        assert!((d.leftover - 50.5).abs() < 1e-12);
        let s = esd_step(StorageState { s_esd: 45.0 }, d.p_ch, d.p_dc, &p, 1.0).unwrap();
        assert!(s.s_esd.abs() < 1e-9);
        // 200 kWh needs 180 kW; 80 kW blocked by the rating
        let d = terminal_esd(0.0, StorageState { s_esd: 200.0 }, &p, 1.0);
        assert_eq!(d.p_dc, 100.0);
        assert!((d.terminal_shortfall - 80.0).abs() < 1e-12);
        assert!((d.leftover - 20.0).abs() < 1e-12);
    }
}
