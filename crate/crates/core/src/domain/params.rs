use serde::{Deserialize, Serialize};

use super::DomainError;

/// Physical and economic constants of one microgrid.
///
/// Units: powers in kW, energies in kWh, costs in $/kWh, `ell` in $/kW².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrogridParams {
    /// Gas turbine fuel cost coefficient.
    pub lambda_mgts: f64,
    pub p_mgts_min: f64,
    pub p_mgts_max: f64,
    pub eta_ch: f64,
    pub eta_dc: f64,
    pub p_ch_max: f64,
    pub p_dc_max: f64,
    pub s_esd_min: f64,
    pub s_esd_max: f64,
    /// Storage operation and maintenance cost per kW of charge or discharge.
    pub lambda_b: f64,
    pub lambda_loss: f64,
    pub psi_mgts: f64,
    pub psi_pv: f64,
    pub psi_wt: f64,
    /// Quadratic imbalance penalty factor.
    pub ell: f64,
    pub p_ig_max: f64,
    pub p_ij_max: f64,
}

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSet {
    /// The reference two-microgrid case.
    Table1,
    /// Cheaper generation/storage variant used to show the tuner adapts.
    Table2,
}

impl std::str::FromStr for ParamSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table1" => Ok(ParamSet::Table1),
            "table2" => Ok(ParamSet::Table2),
            other => Err(format!("unknown parameter set `{other}` (expected table1 or table2)")),
        }
    }
}

impl MicrogridParams {
    /// Reference parameters for microgrid `mg` (0-based). Odd-indexed
    /// microgrids get the second turbine cost coefficient.
    pub fn table1(mg: usize) -> Self {
        MicrogridParams {
            lambda_mgts: if mg % 2 == 0 { 1.3 } else { 1.5 },
            p_mgts_min: 5.0,
            p_mgts_max: 30.0,
            eta_ch: 0.9,
            eta_dc: 0.9,
            p_ch_max: 100.0,
            p_dc_max: 100.0,
            s_esd_min: 0.0,
            s_esd_max: 200.0,
            lambda_b: 0.5,
            lambda_loss: 1.35,
            psi_mgts: 0.02,
            psi_pv: 0.02,
            psi_wt: 0.02,
            ell: 0.5,
            p_ig_max: 500.0,
            p_ij_max: 200.0,
        }
    }

    pub fn table2(mg: usize) -> Self {
        MicrogridParams {
            lambda_mgts: if mg % 2 == 0 { 0.1 } else { 0.2 },
            lambda_loss: 0.15,
            lambda_b: 0.06,
            ..Self::table1(mg)
        }
    }

    pub fn preset(set: ParamSet, mg: usize) -> Self {
        match set {
            ParamSet::Table1 => Self::table1(mg),
            ParamSet::Table2 => Self::table2(mg),
        }
    }

    /// Checks the parameter invariants; `mg` only labels the error.
    pub fn validate(&self, mg: usize) -> Result<(), DomainError> {
        let fail = |reason: String| Err(DomainError::InvalidParams { mg, reason });
        let all = [
            ("lambda_mgts", self.lambda_mgts),
            ("p_mgts_min", self.p_mgts_min),
            ("p_mgts_max", self.p_mgts_max),
            ("eta_ch", self.eta_ch),
            ("eta_dc", self.eta_dc),
            ("p_ch_max", self.p_ch_max),
            ("p_dc_max", self.p_dc_max),
            ("s_esd_min", self.s_esd_min),
            ("s_esd_max", self.s_esd_max),
            ("lambda_b", self.lambda_b),
            ("lambda_loss", self.lambda_loss),
            ("psi_mgts", self.psi_mgts),
            ("psi_pv", self.psi_pv),
            ("psi_wt", self.psi_wt),
            ("ell", self.ell),
            ("p_ig_max", self.p_ig_max),
            ("p_ij_max", self.p_ij_max),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return fail(format!("{name} is not finite"));
            }
            if v < 0.0 {
                return fail(format!("{name} = {v} is negative"));
            }
        }
        if self.p_mgts_min > self.p_mgts_max {
            return fail(format!(
                "p_mgts_min {} exceeds p_mgts_max {}",
                self.p_mgts_min, self.p_mgts_max
            ));
        }
        for (name, eta) in [("eta_ch", self.eta_ch), ("eta_dc", self.eta_dc)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return fail(format!("{name} = {eta} must lie in (0, 1]"));
            }
        }
        if self.s_esd_min >= self.s_esd_max {
            return fail(format!(
                "s_esd_min {} must be below s_esd_max {}",
                self.s_esd_min, self.s_esd_max
            ));
        }
        if self.p_ch_max <= 0.0 || self.p_dc_max <= 0.0 {
            return fail("storage power limits must be positive".into());
        }
        for (name, psi) in [
            ("psi_mgts", self.psi_mgts),
            ("psi_pv", self.psi_pv),
            ("psi_wt", self.psi_wt),
        ] {
            if psi >= 1.0 {
                return fail(format!("{name} = {psi} must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}
