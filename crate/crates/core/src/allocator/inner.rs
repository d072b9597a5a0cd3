//! Fixed-`(tau0, u)` problem: harvest, budgets, time split and powers.

use crate::channel::Scenario;
use crate::eh_model::HarvestModel;
use crate::linalg::{sorted_svd, CMatrix, CVector, C64};

use super::time::{split_maxmin, split_sum, Modes};
use super::waterfill::waterfill;
use super::Objective;

/// How the harvested power is modelled inside the inner problem.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Harvest {
    Model(HarvestModel),
    /// First-order expansion of the logistic curve around per-user anchors.
    Tangent(Vec<f64>),
}

#[derive(Debug, Clone)]
pub(crate) struct UserPrep {
    /// `G_hat G_hat^H`.
    pub a: CMatrix,
    pub upsilon: f64,
    pub gains: Vec<f64>,
}

/// Scenario plus precomputed per-user quantities for one design model.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub scn: Scenario,
    pub harvest: Harvest,
    pub users: Vec<UserPrep>,
    pub modes: Vec<Modes>,
}

#[derive(Debug, Clone)]
pub(crate) struct InnerSolution {
    pub tau0: f64,
    pub u: CVector,
    /// `||G_hat^H u||` per user.
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub budgets: Vec<f64>,
    pub tau: Vec<f64>,
    /// Total radiated uplink power per user.
    pub power: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub rates: Vec<f64>,
    pub feasible: Vec<bool>,
    pub objective: f64,
    /// Objective used by the beam search; continuous through the point where
    /// the max-min value leaves zero.
    pub score: f64,
}

impl Design {
    pub(crate) fn new(scn: Scenario, harvest: Harvest) -> Self {
        let users = scn
            .users
            .iter()
            .map(|u| {
                let (gh, _) = sorted_svd(&u.h_hat);
                let gamma_star: Vec<f64> = gh.iter().map(|g| (g - u.rho).max(0.0)).collect();
                let gains = gamma_star.iter().map(|g| g * g / scn.sigma_n2).collect();
                UserPrep { a: &u.g_hat * u.g_hat.adjoint(), upsilon: u.upsilon, gains }
            })
            .collect::<Vec<_>>();
        let modes = users.iter().map(|p: &UserPrep| Modes::from_gains(&p.gains)).collect();
        Self { scn, harvest, users, modes }
    }

    pub(crate) fn harvest(&self, k: usize, theta: f64) -> f64 {
        let eh = &self.scn.eh[k];
        match &self.harvest {
            Harvest::Model(m) => m.harvest(theta, eh),
            Harvest::Tangent(anchors) => {
                let a = anchors[k];
                let nl = HarvestModel::Nonlinear;
                nl.harvest(a, eh) + nl.slope(a, eh) * (theta - a)
            }
        }
    }

    fn harvest_slope(&self, k: usize, theta: f64) -> f64 {
        let eh = &self.scn.eh[k];
        match &self.harvest {
            Harvest::Model(m) => m.slope(theta, eh),
            Harvest::Tangent(anchors) => HarvestModel::Nonlinear.slope(anchors[k], eh),
        }
    }

    pub(crate) fn received(&self, k: usize, u: &CVector) -> (f64, f64) {
        let s = (&self.users[k].a * u).dotc(u).re.max(0.0).sqrt();
        let d = (s - self.users[k].upsilon).max(0.0);
        (s, self.scn.p_max * d * d)
    }

    pub(crate) fn evaluate(&self, tau0: f64, u: &CVector, objective: Objective) -> InnerSolution {
        let scn = &self.scn;
        let k_users = scn.num_users();
        let mut s = Vec::with_capacity(k_users);
        let mut theta = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let (sk, tk) = self.received(k, u);
            s.push(sk);
            theta.push(tk);
        }
        let budgets: Vec<f64> =
            (0..k_users).map(|k| tau0 * self.harvest(k, theta[k]) - scn.t_max * scn.p_c[k]).collect();
        let feasible: Vec<bool> = (0..k_users).map(|k| budgets[k] > 0.0 && self.modes[k].usable()).collect();
        let e: Vec<f64> = (0..k_users).map(|k| if feasible[k] { budgets[k] / scn.eps[k] } else { 0.0 }).collect();
        let modes = &self.modes;
        let t_wit = (scn.t_max - tau0).max(0.0);
        let tau = match objective {
            Objective::MaxSum => split_sum(&e, modes, t_wit),
            Objective::MaxMin => split_maxmin(&e, modes, t_wit).1,
        };
        let power: Vec<f64> = (0..k_users).map(|k| if tau[k] > 0.0 { e[k] / tau[k] } else { 0.0 }).collect();
        let lambda: Vec<Vec<f64>> = (0..k_users).map(|k| waterfill(&self.users[k].gains, power[k]).0).collect();
        let rates: Vec<f64> = (0..k_users).map(|k| modes[k].rate(tau[k], e[k])).collect();
        let (objective_value, score) = match objective {
            Objective::MaxSum => {
                let v = rates.iter().sum();
                (v, v)
            }
            Objective::MaxMin => {
                let nu = rates.iter().copied().fold(f64::INFINITY, f64::min);
                if nu > 0.0 {
                    (nu, nu)
                } else {
                    (0.0, budgets.iter().map(|b| b.min(0.0)).sum())
                }
            }
        };
        InnerSolution {
            tau0,
            u: u.clone(),
            s,
            theta,
            budgets,
            tau,
            power,
            lambda,
            rates,
            feasible,
            objective: objective_value,
            score,
        }
    }

    /// `d score / d E_k` at an inner optimum (envelope theorem).
    fn budget_weights(&self, sol: &InnerSolution, objective: Objective) -> Vec<f64> {
        let k_users = self.scn.num_users();
        let eps = &self.scn.eps;
        match objective {
            Objective::MaxSum => (0..k_users)
                .map(|k| if sol.tau[k] > 0.0 { self.modes[k].marginal_power(sol.power[k]) / eps[k] } else { 0.0 })
                .collect(),
            Objective::MaxMin if sol.objective > 0.0 => {
                let r_tau: Vec<f64> = (0..k_users).map(|k| self.modes[k].marginal_time(sol.power[k])).collect();
                let norm: f64 = r_tau.iter().map(|r| 1.0 / r).sum();
                (0..k_users)
                    .map(|k| {
                        let r_e = self.modes[k].marginal_power(sol.power[k]) / eps[k];
                        r_e / r_tau[k] / norm
                    })
                    .collect()
            }
            Objective::MaxMin => sol.budgets.iter().map(|&b| if b < 0.0 { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Wirtinger gradient `d score / d u*` at `sol`.
    pub(crate) fn gradient(&self, sol: &InnerSolution, objective: Objective) -> CVector {
        let w = self.budget_weights(sol, objective);
        let mut g = CVector::zeros(sol.u.len());
        for (k, prep) in self.users.iter().enumerate() {
            let sk = sol.s[k];
            let shrink = sk - prep.upsilon;
            if w[k] == 0.0 || shrink <= 0.0 || sk == 0.0 {
                continue;
            }
            let d_theta = sol.tau0 * self.harvest_slope(k, sol.theta[k]);
            let c = w[k] * d_theta * self.scn.p_max * shrink / sk;
            g += &prep.a * &sol.u * C64::from(c);
        }
        g
    }
}
