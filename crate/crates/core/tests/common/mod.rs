//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use wpcn_core::allocator::Objective;
use wpcn_core::channel::{generate_scenario, Scenario, ScenarioConfig};
use wpcn_core::eh_model::harvest_nonlinear;
use wpcn_core::linalg::C64;

/// Desk-scale scenario with `k` users and default geometry.
pub fn desk(k: usize, seed: u64) -> Scenario {
    let mut cfg = ScenarioConfig::default();
    cfg.users.count = k;
    generate_scenario(&cfg, seed).unwrap()
}

/// Two transmit antennas, one user antenna, real-valued estimates.
pub fn real_two_antenna(k: usize, seed: u64) -> Scenario {
    let mut cfg = ScenarioConfig::default();
    cfg.users.count = k;
    cfg.antennas.n_t = 2;
    cfg.antennas.n_u = 1;
    cfg.antennas.n_r = 2;
    let mut scn = generate_scenario(&cfg, seed).unwrap();
    for u in &mut scn.users {
        u.g_hat = u.g_hat.map(|z| C64::from(z.re * 2f64.sqrt()));
        u.h_hat = u.h_hat.map(|z| C64::from(z.re * 2f64.sqrt()));
    }
    scn.truth = None;
    scn
}

/// Worst-case rate of a single-mode user given its radiated energy.
fn link_rate(tau: f64, e: f64, gain: f64) -> f64 {
    if tau <= 0.0 || e <= 0.0 {
        return 0.0;
    }
    tau * (1.0 + e / tau * gain).log2()
}

/// Best objective over the time split for fixed budgets (single mode per user).
fn best_split(e: &[f64], gains: &[f64], t: f64, objective: Objective) -> f64 {
    match (e.len(), objective) {
        (1, _) => link_rate(t, e[0], gains[0]),
        (2, Objective::MaxSum) => {
            let n = 400;
            (0..=n)
                .map(|i| {
                    let t1 = t * i as f64 / n as f64;
                    link_rate(t1, e[0], gains[0]) + link_rate(t - t1, e[1], gains[1])
                })
                .fold(f64::MIN, f64::max)
        }
        (2, Objective::MaxMin) => {
            if e[0] <= 0.0 || e[1] <= 0.0 {
                return 0.0;
            }
            // Rates cross once: bisect on the first user's share.
            let (mut lo, mut hi) = (0.0, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if link_rate(mid, e[0], gains[0]) < link_rate(t - mid, e[1], gains[1]) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            link_rate(lo, e[0], gains[0]).min(link_rate(t - lo, e[1], gains[1]))
        }
        _ => panic!("oracle handles one or two users"),
    }
}

/// Brute force over `u = (cos a, sin a e^{ip})`, `tau0` and the time split for
/// two transmit antennas, real channels and one uplink mode per user.
pub fn brute_force(scn: &Scenario, objective: Objective) -> f64 {
    assert_eq!(scn.n_t, 2);
    let k = scn.num_users();
    let gains: Vec<f64> = scn
        .users
        .iter()
        .map(|u| {
            let s = u.h_hat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let w = (s - u.rho).max(0.0);
            w * w / scn.sigma_n2
        })
        .collect();
    let g: Vec<[f64; 2]> = scn.users.iter().map(|u| [u.g_hat[(0, 0)].re, u.g_hat[(1, 0)].re]).collect();
    let mut best = 0.0f64;
    let (na, np, nt) = (90, 30, 100);
    for ia in 0..=na {
        let a = FRAC_PI_2 * ia as f64 / na as f64;
        for ip in 0..=np {
            let cp = (PI * ip as f64 / np as f64).cos();
            let harvest: Vec<f64> = (0..k)
                .map(|j| {
                    let (c, s) = (a.cos(), a.sin());
                    let amp2 =
                        g[j][0] * g[j][0] * c * c + g[j][1] * g[j][1] * s * s + 2.0 * g[j][0] * g[j][1] * c * s * cp;
                    let d = (amp2.max(0.0).sqrt() - scn.users[j].upsilon).max(0.0);
                    harvest_nonlinear(scn.p_max * d * d, &scn.eh[j]).unwrap()
                })
                .collect();
            let value = |tau0: f64| {
                let e: Vec<f64> =
                    (0..k).map(|j| ((tau0 * harvest[j] - scn.t_max * scn.p_c[j]) / scn.eps[j]).max(0.0)).collect();
                best_split(&e, &gains, scn.t_max - tau0, objective)
            };
            // Coarse grid, then a fine grid around its maximizer.
            let step = scn.t_max / nt as f64;
            let (mut top, mut at) = (0.0f64, 0.0);
            for it in 1..nt {
                let v = value(step * it as f64);
                if v > top {
                    top = v;
                    at = step * it as f64;
                }
            }
            for it in 0..=nt {
                let tau0 = (at - step + 2.0 * step * it as f64 / nt as f64).clamp(0.0, scn.t_max);
                top = top.max(value(tau0));
            }
            best = best.max(top);
        }
    }
    best
}

/// Sample standard error of the mean.
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
}
