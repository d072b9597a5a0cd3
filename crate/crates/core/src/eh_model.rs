//! RF-to-DC energy-harvesting transfer functions.
//!
//! The non-linear model is a logistic curve in the received RF power,
//! shifted and rescaled so that zero input harvests exactly zero and the
//! output saturates at `M`:
//!
//! ```text
//! Psi(p) = M / (1 + exp(-a (p - b)))
//! Phi(p) = (Psi(p) - M * Omega) / (1 - Omega),   Omega = 1 / (1 + exp(a b))
//! ```
//!
//! `Phi` is convex below the inflection point `b` and concave above it, so the
//! first-order (tangent) bound used by successive convex approximation is
//! only an upper bound on `p >= b`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Exponent arguments are clamped to this magnitude before `exp`.
const EXP_CLAMP: f64 = 700.0;

fn exp_clamped(x: f64) -> f64 {
    x.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// Parameters `(M, a, b)` of the logistic harvesting curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEhParams", into = "RawEhParams")]
pub struct EhParams {
    m: f64,
    a: f64,
    b: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawEhParams {
    #[serde(rename = "M_watts")]
    m_watts: f64,
    a_per_watt: f64,
    b_watts: f64,
}

impl Default for RawEhParams {
    fn default() -> Self {
        EhParams::simulation_default().into()
    }
}

impl TryFrom<RawEhParams> for EhParams {
    type Error = crate::error::WpcnError;

    fn try_from(raw: RawEhParams) -> Result<Self> {
        EhParams::new(raw.m_watts, raw.a_per_watt, raw.b_watts)
    }
}

impl From<EhParams> for RawEhParams {
    fn from(p: EhParams) -> Self {
        RawEhParams { m_watts: p.m, a_per_watt: p.a, b_watts: p.b }
    }
}

impl EhParams {
    /// Validates `M > 0`, `a > 0`, `b >= 0` and caches `Omega`.
    pub fn new(m: f64, a: f64, b: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(domain(format!("EH saturation M must be > 0, got {m}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(domain(format!("EH slope a must be > 0, got {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(domain(format!("EH turn-on b must be >= 0, got {b}")));
        }
        let omega = 1.0 / (1.0 + exp_clamped(a * b));
        Ok(EhParams { m, a, b, omega })
    }

    /// Curve fitted to a measured rectifier (a = 150, b = 0.014 W, M = 24 mW).
    pub fn measured_fit() -> Self {
        EhParams::new(0.024, 150.0, 0.014).expect("valid constants")
    }

    /// Parameters used in the network simulations (a = 1500, b = 2.2 mW, M = 24 mW).
    pub fn simulation_default() -> Self {
        EhParams::new(0.024, 1500.0, 0.0022).expect("valid constants")
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Plain logistic `Psi(p)`.
    pub fn logistic(&self, p_rf: f64) -> f64 {
        self.m / (1.0 + exp_clamped(-self.a * (p_rf - self.b)))
    }

    fn phi(&self, p_rf: f64) -> f64 {
        // Psi(0) = M * Omega exactly, so the subtraction cancels at zero input.
        if p_rf == 0.0 {
            return 0.0;
        }
        let x = self.a * (p_rf - self.b);
        let v = if x < 0.0 {
            (self.logistic(p_rf) - self.m * self.omega) / (1.0 - self.omega)
        } else {
            // Upper half: M * (1 - sigma(-x) / (1 - Omega)) keeps the result below M.
            let tail = 1.0 / (1.0 + x.min(EXP_CLAMP).exp());
            self.m * (1.0 - tail / (1.0 - self.omega))
        };
        v.clamp(0.0, self.m.next_down())
    }

    fn phi_prime(&self, p_rf: f64) -> f64 {
        let psi = self.logistic(p_rf);
        self.a * psi * (1.0 - psi / self.m) / (1.0 - self.omega)
    }
}

fn check_power(p_rf: f64) -> Result<()> {
    if p_rf.is_nan() || p_rf < 0.0 {
        return Err(domain(format!("received RF power must be >= 0, got {p_rf}")));
    }
    Ok(())
}

/// Harvested DC power under the logistic model.
pub fn harvest_nonlinear(p_rf: f64, params: &EhParams) -> Result<f64> {
    check_power(p_rf)?;
    Ok(params.phi(p_rf))
}

/// Harvested DC power under a constant conversion efficiency.
pub fn harvest_linear(p_rf: f64, eta: f64) -> Result<f64> {
    check_power(p_rf)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain(format!("efficiency must lie in [0, 1], got {eta}")));
    }
    Ok(eta * p_rf)
}

/// `dPhi/dp` of the logistic model. Strictly positive for finite input.
pub fn harvest_derivative(p_rf: f64, params: &EhParams) -> Result<f64> {
    check_power(p_rf)?;
    Ok(params.phi_prime(p_rf))
}

/// Tangent line of `Phi` at `anchor`, evaluated at `p_rf`.
///
/// This dominates `Phi(p_rf)` whenever both points lie in the concave region
/// `p >= b`; below `b` it can undershoot.
pub fn sca_upper_bound(p_rf: f64, anchor: f64, params: &EhParams) -> Result<f64> {
    check_power(p_rf)?;
    check_power(anchor)?;
    Ok(params.phi(anchor) + params.phi_prime(anchor) * (p_rf - anchor))
}

/// Harvesting model used when designing a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarvestModel {
    /// Logistic curve with per-user parameters taken from the scenario.
    Nonlinear,
    /// `eta * p`, independent of the scenario's curve.
    Linear { eta: f64 },
}

impl HarvestModel {
    /// Harvested power for received power `p_rf >= 0`.
    pub fn harvest(&self, p_rf: f64, params: &EhParams) -> f64 {
        match *self {
            HarvestModel::Nonlinear => params.phi(p_rf.max(0.0)),
            HarvestModel::Linear { eta } => eta * p_rf.max(0.0),
        }
    }

    pub fn slope(&self, p_rf: f64, params: &EhParams) -> f64 {
        match *self {
            HarvestModel::Nonlinear => params.phi_prime(p_rf.max(0.0)),
            HarvestModel::Linear { eta } => eta,
        }
    }
}
