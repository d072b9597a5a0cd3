//! JSON scenario configuration.
//!
//! Every section is optional; omitted fields take the simulation defaults
//! (4 users, 4x4 stations, 2 antennas per user, 915 MHz, 35 dBm).

use serde::{Deserialize, Serialize};

use crate::eh_model::EhParams;
use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Antennas {
    pub n_t: usize,
    pub n_r: usize,
    pub n_u: usize,
}

impl Default for Antennas {
    fn default() -> Self {
        Antennas { n_t: 4, n_r: 4, n_u: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Users {
    pub count: usize,
}

impl Default for Users {
    fn default() -> Self {
        Users { count: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub min_m: f64,
    pub max_m: f64,
    pub ir_distance_m: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { min_m: 2.0, max_m: 20.0, ir_distance_m: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rf {
    pub carrier_hz: f64,
    pub pathloss_exponent: f64,
    /// Distance up to which free-space loss applies.
    pub breakpoint_m: f64,
    pub rician_k_db: f64,
    pub gain_ps_dbi: f64,
    pub gain_ir_dbi: f64,
    /// Recorded for unit conversion only; throughput is reported per Hz.
    pub bandwidth_hz: f64,
}

impl Default for Rf {
    fn default() -> Self {
        Rf {
            carrier_hz: 915e6,
            pathloss_exponent: 3.6,
            breakpoint_m: 5.0,
            rician_k_db: 3.0,
            gain_ps_dbi: 10.0,
            gain_ir_dbi: 2.0,
            bandwidth_hz: 200e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    pub sigma_n2_dbm: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { sigma_n2_dbm: -95.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Csi {
    /// Normalized maximum estimation error, identical for all users.
    pub sigma_est2: f64,
}

impl Default for Csi {
    fn default() -> Self {
        Csi { sigma_est2: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Power {
    pub p_max_dbm: f64,
    pub circuit_w: f64,
    /// Power-amplifier efficiency; the consumption multiplier is its inverse.
    pub pa_efficiency: f64,
}

impl Default for Power {
    fn default() -> Self {
        Power { p_max_dbm: 35.0, circuit_w: 5e-6, pa_efficiency: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Slot {
    pub t_max: f64,
}

impl Default for Slot {
    fn default() -> Self {
        Slot { t_max: 1.0 }
    }
}

/// Parameters from which random scenarios are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub antennas: Antennas,
    pub users: Users,
    pub geometry: Geometry,
    pub rf: Rf,
    pub noise: Noise,
    pub csi: Csi,
    pub power: Power,
    pub eh: EhParams,
    pub slot: Slot,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            antennas: Antennas::default(),
            users: Users::default(),
            geometry: Geometry::default(),
            rf: Rf::default(),
            noise: Noise::default(),
            csi: Csi::default(),
            power: Power::default(),
            eh: EhParams::simulation_default(),
            slot: Slot::default(),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.antennas;
        if a.n_t == 0 || a.n_r == 0 || a.n_u == 0 {
            return Err(config(format!(
                "antenna counts must be positive (n_t={}, n_r={}, n_u={})",
                a.n_t, a.n_r, a.n_u
            )));
        }
        if self.users.count == 0 {
            return Err(config("users.count must be positive"));
        }
        let g = &self.geometry;
        if !(g.min_m.is_finite() && g.min_m > 0.0 && g.max_m.is_finite() && g.max_m >= g.min_m) {
            return Err(config(format!(
                "user distances must satisfy 0 < min_m <= max_m (got {} .. {})",
                g.min_m, g.max_m
            )));
        }
        if !(g.ir_distance_m.is_finite() && g.ir_distance_m > 0.0) {
            return Err(config("geometry.ir_distance_m must be positive"));
        }
        let rf = &self.rf;
        if !(rf.carrier_hz > 0.0 && rf.pathloss_exponent > 0.0 && rf.breakpoint_m > 0.0) {
            return Err(config("carrier, path-loss exponent and breakpoint must be positive"));
        }
        if !rf.rician_k_db.is_finite() || !rf.gain_ps_dbi.is_finite() || !rf.gain_ir_dbi.is_finite() {
            return Err(config("RF gains must be finite"));
        }
        if !self.noise.sigma_n2_dbm.is_finite() {
            return Err(config("noise.sigma_n2_dbm must be finite"));
        }
        if !(self.csi.sigma_est2.is_finite() && self.csi.sigma_est2 >= 0.0) {
            return Err(config("csi.sigma_est2 must be >= 0"));
        }
        let p = &self.power;
        if !p.p_max_dbm.is_finite() {
            return Err(config("power.p_max_dbm must be finite"));
        }
        if !(p.circuit_w.is_finite() && p.circuit_w >= 0.0) {
            return Err(config("power.circuit_w must be >= 0"));
        }
        if !(p.pa_efficiency > 0.0 && p.pa_efficiency < 1.0) {
            return Err(config("power.pa_efficiency must lie in (0, 1)"));
        }
        if !(self.slot.t_max.is_finite() && self.slot.t_max > 0.0) {
            return Err(config("slot.t_max must be positive"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
