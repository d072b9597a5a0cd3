//! Per-user rate functions and the WIT time split.
//!
//! A user with radiated energy `e = E/eps` and mode gains `g` (sorted, in
//! 1/Watt) that transmits for `tau` at total power `p = e/tau` water-fills to
//! level `mu` and earns `tau * C(mu)` bits with `C = sum log2(mu g_i)` over
//! active modes.

use std::f64::consts::LN_2;

use super::roots::newton_increasing;
use super::waterfill::{water_level, waterfill};

/// Mode gains `gamma*^2 / sigma_n2`, positive entries only, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Modes {
    gains: Vec<f64>,
}

impl Modes {
    pub(crate) fn new(gamma_star: &[f64], sigma_n2: f64) -> Self {
        let gains: Vec<f64> = gamma_star.iter().map(|g| g * g / sigma_n2).collect();
        Self::from_gains(&gains)
    }

    pub(crate) fn from_gains(gains: &[f64]) -> Self {
        let mut gains: Vec<f64> = gains.iter().copied().filter(|&g| g > 0.0 && g.is_finite()).collect();
        gains.sort_by(|a, b| b.total_cmp(a));
        Self { gains }
    }

    pub(crate) fn usable(&self) -> bool {
        !self.gains.is_empty()
    }

    fn level(&self, p: f64) -> f64 {
        water_level(self.gains.iter().copied(), p)
    }

    /// `(x_i = mu g_i - 1)` for the active modes at total power `p`.
    fn excess(&self, p: f64) -> impl Iterator<Item = f64> + '_ {
        let mu = self.level(p);
        self.gains.iter().map(move |g| mu * g - 1.0).take_while(|&x| x > 0.0)
    }

    /// Spectral efficiency `C` (bits/s/Hz) at total power `p`.
    pub(crate) fn capacity(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        self.excess(p).map(f64::ln_1p).sum::<f64>() / LN_2
    }

    /// `dR/dtau` at total power `p`, i.e. `C - p dC/dp`.
    pub(crate) fn marginal_time(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        self.excess(p).map(tail).sum::<f64>() / LN_2
    }

    /// `(C, dR/dtau)` at total power `p` in one pass.
    pub(crate) fn capacity_and_marginal(&self, p: f64) -> (f64, f64) {
        if p <= 0.0 {
            return (0.0, 0.0);
        }
        let (mut c, mut h) = (0.0, 0.0);
        for x in self.excess(p) {
            let l = x.ln_1p();
            c += l;
            h += if x < 1e-3 { tail(x) } else { l - x / (1.0 + x) };
        }
        (c / LN_2, h / LN_2)
    }

    /// `dC/dp = 1/(mu ln 2)`, the marginal rate per Watt.
    pub(crate) fn marginal_power(&self, p: f64) -> f64 {
        1.0 / (self.level(p.max(0.0)) * LN_2)
    }

    /// Derivative of [`Modes::marginal_time`] in `p`: `p / (n mu^2 ln 2)`.
    pub(crate) fn marginal_time_slope(&self, p: f64) -> f64 {
        let mu = self.level(p);
        let n = self.gains.iter().take_while(|&&g| mu * g > 1.0).count().max(1);
        p / (n as f64 * mu * mu * LN_2)
    }

    /// Rate of a user with radiated energy `e` transmitting for `tau`.
    pub(crate) fn rate(&self, tau: f64, e: f64) -> f64 {
        if tau <= 0.0 || e <= 0.0 || !self.usable() {
            return 0.0;
        }
        tau * self.capacity(e / tau)
    }
}

/// `ln(1+x) - x/(1+x)`, accurate for small `x`.
fn tail(x: f64) -> f64 {
    if x < 1e-3 {
        // Alternating series sum_{n>=2} (-1)^n (n-1)/n x^n.
        let mut term = x * x;
        let mut sum = 0.0;
        for n in 2..9 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term * (n - 1) as f64 / n as f64;
            term *= x;
        }
        sum
    } else {
        x.ln_1p() - x / (1.0 + x)
    }
}

/// Bits delivered in `tau_k` with `energy` Joule available for radiation times `eps`.
pub fn user_rate(tau_k: f64, energy: f64, gamma_star: &[f64], sigma_n2: f64, eps: f64) -> f64 {
    if tau_k <= 0.0 || energy <= 0.0 {
        return 0.0;
    }
    let gains: Vec<f64> = gamma_star.iter().map(|g| g * g / sigma_n2).collect();
    let (lambda, _) = waterfill(&gains, energy / (eps * tau_k));
    tau_k * gains.iter().zip(&lambda).map(|(g, l)| (g * l).ln_1p()).sum::<f64>() / LN_2
}

/// Radiated energies `e_k = E_k / eps_k`, zero for unusable users.
fn radiated(budgets: &[f64], modes: &[Modes], eps: &[f64]) -> Vec<f64> {
    budgets.iter().zip(modes).zip(eps).map(|((&b, m), &e)| if b > 0.0 && m.usable() { b / e } else { 0.0 }).collect()
}

/// Total power at which the marginal time value equals `kappa`, from `guess`.
fn power_for_marginal(m: &Modes, kappa: f64, guess: f64) -> f64 {
    let y = newton_increasing(
        |y| {
            let p = y.exp();
            (m.marginal_time(p) - kappa, p * m.marginal_time_slope(p))
        },
        guess.ln(),
        f64::NEG_INFINITY,
        f64::INFINITY,
        2.0,
        1e-14,
    );
    y.exp()
}

pub(crate) fn split_sum(e: &[f64], modes: &[Modes], t_wit: f64) -> Vec<f64> {
    let active: Vec<usize> = (0..e.len()).filter(|&k| e[k] > 0.0).collect();
    let mut tau = vec![0.0; e.len()];
    if t_wit <= 0.0 || active.is_empty() {
        return tau;
    }
    if active.len() == 1 {
        tau[active[0]] = t_wit;
        return tau;
    }
    // Powers at the equal split seed both the multiplier and the inner solves.
    let mut power: Vec<f64> = e.iter().map(|x| x * active.len() as f64 / t_wit).collect();
    let k0 = active.iter().map(|&k| modes[k].marginal_time(power[k])).sum::<f64>() / active.len() as f64;
    // In z = ln kappa, t_wit - sum tau_k is increasing.
    let z = newton_increasing(
        |z| {
            let kappa = z.exp();
            let (mut used, mut slope) = (0.0, 0.0);
            for &k in &active {
                let p = power_for_marginal(&modes[k], kappa, power[k]);
                power[k] = p;
                let t = e[k] / p;
                used += t;
                slope += t * kappa / (p * modes[k].marginal_time_slope(p));
            }
            (t_wit - used, slope)
        },
        k0.ln(),
        f64::NEG_INFINITY,
        f64::INFINITY,
        2.0,
        1e-13,
    );
    let kappa = z.exp();
    for &k in &active {
        tau[k] = e[k] / power_for_marginal(&modes[k], kappa, power[k]);
    }
    fit_budget(&mut tau, t_wit);
    tau
}

/// Rescales `tau` so it sums to exactly `t_wit`.
fn fit_budget(tau: &mut [f64], t_wit: f64) {
    let s: f64 = tau.iter().sum();
    if s > 0.0 {
        for t in tau.iter_mut() {
            *t *= t_wit / s;
        }
    }
}

/// Smallest `tau` in `[0, t_wit]` reaching `target` bits; `full` is the rate at `t_wit`.
fn time_for_rate(m: &Modes, e: f64, target: f64, t_wit: f64, full: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if full <= target {
        return t_wit;
    }
    // Concavity puts the chord point above the root, so Newton descends.
    newton_increasing(
        |t| {
            if t <= 0.0 {
                return (-target, f64::INFINITY);
            }
            let (c, h) = m.capacity_and_marginal(e / t);
            (t * c - target, h)
        },
        t_wit * target / full,
        0.0,
        t_wit,
        t_wit,
        1e-15 * t_wit.max(1.0),
    )
}

pub(crate) fn split_maxmin(e: &[f64], modes: &[Modes], t_wit: f64) -> (f64, Vec<f64>) {
    let mut tau = vec![0.0; e.len()];
    if t_wit <= 0.0 || e.is_empty() || e.iter().any(|&x| x <= 0.0) {
        return (0.0, tau);
    }
    let full: Vec<f64> = (0..e.len()).map(|k| modes[k].rate(t_wit, e[k])).collect();
    let nu_max = full.iter().copied().fold(f64::INFINITY, f64::min);
    if nu_max <= 0.0 {
        return (0.0, tau);
    }
    let nu = if e.len() == 1 {
        nu_max
    } else {
        // Total time is convex increasing in nu; start at the right end.
        newton_increasing(
            |nu| {
                let (mut used, mut slope) = (0.0, 0.0);
                for k in 0..e.len() {
                    let t = time_for_rate(&modes[k], e[k], nu, t_wit, full[k]);
                    used += t;
                    if t > 0.0 {
                        slope += 1.0 / modes[k].marginal_time(e[k] / t);
                    }
                }
                (used - t_wit, slope)
            },
            nu_max,
            0.0,
            nu_max,
            nu_max,
            1e-14 * nu_max,
        )
    };
    for k in 0..e.len() {
        tau[k] = time_for_rate(&modes[k], e[k], nu, t_wit, full[k]);
    }
    let s: f64 = tau.iter().sum();
    if s > t_wit {
        fit_budget(&mut tau, t_wit);
    }
    let nu = (0..e.len()).map(|k| modes[k].rate(tau[k], e[k])).fold(f64::INFINITY, f64::min);
    (nu, tau)
}

fn modes_of(gamma_stars: &[Vec<f64>], sigma_n2: f64) -> Vec<Modes> {
    gamma_stars.iter().map(|g| Modes::new(g, sigma_n2)).collect()
}

/// WIT durations maximizing the sum of user rates.
pub fn allocate_time_sum(
    budgets: &[f64],
    gamma_stars: &[Vec<f64>],
    t_wit: f64,
    sigma_n2: f64,
    eps: &[f64],
) -> Vec<f64> {
    let modes = modes_of(gamma_stars, sigma_n2);
    split_sum(&radiated(budgets, &modes, eps), &modes, t_wit)
}

/// Common rate `nu` and WIT durations maximizing the minimum user rate.
pub fn allocate_time_maxmin(
    budgets: &[f64],
    gamma_stars: &[Vec<f64>],
    t_wit: f64,
    sigma_n2: f64,
    eps: &[f64],
) -> (f64, Vec<f64>) {
    let modes = modes_of(gamma_stars, sigma_n2);
    split_maxmin(&radiated(budgets, &modes, eps), &modes, t_wit)
}
