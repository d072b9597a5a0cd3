//! Channel scenarios, bounded CSI uncertainty and worst-case transforms.

mod config;
mod generate;
pub(crate) mod uncertainty;

pub use config::{db_to_linear, dbm_to_watts, Antennas, Csi, Geometry, Noise, Power, Rf, ScenarioConfig, Slot, Users};
pub use generate::{free_space_loss_db, generate_scenario, path_loss_db};
pub use uncertainty::{
    adversarial_downlink_error, best_s_procedure_margin, s_procedure_certify, s_procedure_min_eigenvalue,
    sample_uncertainty, worst_case_harvest_power, worst_case_singular_values, UncertaintySample,
};

use crate::eh_model::EhParams;
use crate::error::{domain, Result};
use crate::linalg::{sorted_svd, CMatrix};

/// Estimated channels of one user and the radii of their error balls.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    /// Power station to user, `n_t x n_u`.
    pub g_hat: CMatrix,
    /// User to information receiver, `n_u x n_r`.
    pub h_hat: CMatrix,
    /// Frobenius radius of the downlink error.
    pub upsilon: f64,
    /// Frobenius radius of the uplink error.
    pub rho: f64,
}

impl UserChannel {
    /// Estimated uplink singular values, descending, `min(n_u, n_r)` entries.
    pub fn uplink_singular_values(&self) -> Vec<f64> {
        sorted_svd(&self.h_hat).0
    }
}

/// Realized channels, known to the simulator but not to the designer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueChannel {
    pub g: CMatrix,
    pub h: CMatrix,
}

/// A network instance: per-user channels plus system constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: Vec<UserChannel>,
    pub p_max: f64,
    pub t_max: f64,
    pub sigma_n2: f64,
    pub eps: Vec<f64>,
    pub p_c: Vec<f64>,
    pub eh: Vec<EhParams>,
    pub n_t: usize,
    pub n_r: usize,
    pub n_u: usize,
    /// Present for generated scenarios.
    pub truth: Option<Vec<TrueChannel>>,
}

impl Scenario {
    /// Builds a scenario with identical per-user constants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        users: Vec<UserChannel>,
        p_max: f64,
        t_max: f64,
        sigma_n2: f64,
        eps: f64,
        p_c: f64,
        eh: EhParams,
    ) -> Result<Self> {
        let first = users.first().ok_or_else(|| domain("scenario needs at least one user"))?;
        let (n_t, n_u) = first.g_hat.shape();
        let n_r = first.h_hat.ncols();
        let k = users.len();
        let s = Scenario {
            users,
            p_max,
            t_max,
            sigma_n2,
            eps: vec![eps; k],
            p_c: vec![p_c; k],
            eh: vec![eh; k],
            n_t,
            n_r,
            n_u,
            truth: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.users.len();
        if k == 0 {
            return Err(domain("scenario needs at least one user"));
        }
        if !(self.p_max > 0.0 && self.t_max > 0.0 && self.sigma_n2 > 0.0) {
            return Err(domain("p_max, t_max and sigma_n2 must be positive"));
        }
        if self.eps.len() != k || self.p_c.len() != k || self.eh.len() != k {
            return Err(domain("per-user constant vectors must have one entry per user"));
        }
        if self.eps.iter().any(|&e| !(e > 1.0)) {
            return Err(domain("amplifier multipliers must exceed 1"));
        }
        if self.p_c.iter().any(|&p| !(p >= 0.0)) {
            return Err(domain("circuit powers must be >= 0"));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.g_hat.shape() != (self.n_t, self.n_u) || u.h_hat.shape() != (self.n_u, self.n_r) {
                return Err(domain(format!("user {i}: channel dimensions do not match antenna counts")));
            }
            if !(u.upsilon >= 0.0 && u.rho >= 0.0) {
                return Err(domain(format!("user {i}: uncertainty radii must be >= 0")));
            }
            let finite = u.g_hat.iter().chain(u.h_hat.iter()).all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return Err(domain(format!("user {i}: channel entries must be finite")));
            }
        }
        Ok(())
    }

    /// Downlink treated as perfectly known; uplink radii kept.
    pub fn without_downlink_uncertainty(&self) -> Scenario {
        let mut s = self.clone();
        s.users.iter_mut().for_each(|u| u.upsilon = 0.0);
        s
    }

    /// Realized channels with zero radii. Falls back to the estimates when
    /// no realization is attached.
    pub fn perfect_knowledge(&self) -> Scenario {
        let mut s = self.clone();
        if let Some(truth) = &self.truth {
            for (u, t) in s.users.iter_mut().zip(truth) {
                u.g_hat = t.g.clone();
                u.h_hat = t.h.clone();
            }
        }
        s.users.iter_mut().for_each(|u| {
            u.upsilon = 0.0;
            u.rho = 0.0;
        });
        s
    }

    /// Copy with every radius multiplied by `factor`.
    pub fn with_scaled_radii(&self, factor: f64) -> Scenario {
        let mut s = self.clone();
        s.users.iter_mut().for_each(|u| {
            u.upsilon *= factor;
            u.rho *= factor;
        });
        s
    }
}
