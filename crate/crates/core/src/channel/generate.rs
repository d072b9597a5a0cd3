//! Random scenario generation.
//!
//! Downlink: Rician fading (rank-one ULA line-of-sight plus Rayleigh
//! scattering) on top of a dual-slope path loss: free space up to the
//! breakpoint, then `10 n log10(d / d_bp)` beyond it. Uplink: Rayleigh
//! fading over the fixed station-to-receiver distance.
//!
//! The realized channels are drawn first. Radii follow from the normalized
//! error level, `upsilon = sqrt(sigma_est2) * ||G||_2`, and the estimates are
//! `G_hat = G - dG` with `dG` drawn from the ball. Random draws are consumed
//! in the same order regardless of `sigma_est2`, so sweeping the error level
//! under a fixed seed keeps the realized channels and error directions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{db_to_linear, dbm_to_watts, ScenarioConfig};
use super::uncertainty::draw_ball;
use super::{Scenario, TrueChannel, UserChannel};
use crate::error::Result;
use crate::linalg::{spectral_norm, CMatrix, C64};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Friis free-space loss in dB.
pub fn free_space_loss_db(distance_m: f64, carrier_hz: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    20.0 * (4.0 * PI * distance_m / wavelength).log10()
}

/// Dual-slope loss: free space up to `breakpoint_m`, exponent `exponent` beyond.
pub fn path_loss_db(distance_m: f64, carrier_hz: f64, breakpoint_m: f64, exponent: f64) -> f64 {
    if distance_m <= breakpoint_m {
        free_space_loss_db(distance_m, carrier_hz)
    } else {
        free_space_loss_db(breakpoint_m, carrier_hz) + 10.0 * exponent * (distance_m / breakpoint_m).log10()
    }
}

pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

fn steering(n: usize, angle: f64) -> Vec<C64> {
    (0..n).map(|i| C64::from_polar(1.0, PI * i as f64 * angle.sin())).collect()
}

/// Draws a scenario. Identical `(config, seed)` yields an identical scenario.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_t, n_r, n_u) = (config.antennas.n_t, config.antennas.n_r, config.antennas.n_u);
    let rf = &config.rf;
    let k_factor = db_to_linear(rf.rician_k_db);
    let los_amp = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos_amp = (1.0 / (k_factor + 1.0)).sqrt();
    let ul_loss = path_loss_db(config.geometry.ir_distance_m, rf.carrier_hz, rf.breakpoint_m, rf.pathloss_exponent);
    let ul_gain = db_to_linear(rf.gain_ir_dbi - ul_loss).sqrt();
    let err = config.csi.sigma_est2.sqrt();

    let k = config.users.count;
    let mut users = Vec::with_capacity(k);
    let mut truth = Vec::with_capacity(k);
    for _ in 0..k {
        let d = rng.random_range(config.geometry.min_m..=config.geometry.max_m);
        let aod: f64 = rng.random_range(0.0..2.0 * PI);
        let aoa: f64 = rng.random_range(0.0..2.0 * PI);
        let scatter = complex_gaussian(&mut rng, n_t, n_u);
        let h_small = complex_gaussian(&mut rng, n_u, n_r);

        let dl_loss = path_loss_db(d, rf.carrier_hz, rf.breakpoint_m, rf.pathloss_exponent);
        let dl_gain = db_to_linear(rf.gain_ps_dbi - dl_loss).sqrt();
        let a_t = steering(n_t, aod);
        let a_u = steering(n_u, aoa);
        let los = CMatrix::from_fn(n_t, n_u, |i, j| a_t[i] * a_u[j].conj());
        let g = (los * C64::from(los_amp) + scatter * C64::from(nlos_amp)) * C64::from(dl_gain);
        let h = h_small * C64::from(ul_gain);

        let upsilon = err * spectral_norm(&g);
        let rho = err * spectral_norm(&h);
        let (dg, _) = draw_ball(&mut rng, n_t, n_u, upsilon);
        let (dh, _) = draw_ball(&mut rng, n_u, n_r, rho);
        users.push(UserChannel { g_hat: &g - dg, h_hat: &h - dh, upsilon, rho });
        truth.push(TrueChannel { g, h });
    }

    let s = Scenario {
        users,
        p_max: dbm_to_watts(config.power.p_max_dbm),
        t_max: config.slot.t_max,
        sigma_n2: dbm_to_watts(config.noise.sigma_n2_dbm),
        eps: vec![1.0 / config.power.pa_efficiency; k],
        p_c: vec![config.power.circuit_w; k],
        eh: vec![config.eh; k],
        n_t,
        n_r,
        n_u,
        truth: Some(truth),
    };
    s.validate()?;
    Ok(s)
}
