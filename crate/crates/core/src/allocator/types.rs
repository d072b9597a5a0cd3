use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{config, Result, WpcnError};
use crate::linalg::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxSum,
    MaxMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    LinearBaseline,
    NonRobust,
    PerfectCsi,
}

impl Objective {
    pub const ALL: [Objective; 2] = [Objective::MaxSum, Objective::MaxMin];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MaxSum => "max_sum",
            Objective::MaxMin => "max_min",
        }
    }
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::LinearBaseline, Scheme::NonRobust, Scheme::PerfectCsi];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::LinearBaseline => "linear_baseline",
            Scheme::NonRobust => "non_robust",
            Scheme::PerfectCsi => "perfect_csi",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = WpcnError;
    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL.into_iter().find(|o| o.as_str() == s).ok_or_else(|| config(format!("unknown objective `{s}`")))
    }
}

impl FromStr for Scheme {
    type Err = WpcnError;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|o| o.as_str() == s).ok_or_else(|| config(format!("unknown scheme `{s}`")))
    }
}

/// Efficiency assumed by the linear-model baseline.
pub const LINEAR_BASELINE_ETA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Number of intervals on the uniform `tau0` grid over `[0, T_max]`.
    pub tau0_grid_points: usize,
    /// Golden-section steps on `tau0` between the neighbours of the best grid
    /// point; 0 returns the plain grid maximizer.
    pub tau0_refine_iters: usize,
    /// Candidate beams refined by local ascent at each grid point.
    pub beam_multistarts: usize,
    pub bisection_tol: f64,
    pub sca_max_iters: usize,
    pub objective: Objective,
    pub scheme: Scheme,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tau0_grid_points: 50,
            tau0_refine_iters: 10,
            beam_multistarts: 3,
            bisection_tol: 1e-9,
            sca_max_iters: 20,
            objective: Objective::MaxSum,
            scheme: Scheme::Proposed,
        }
    }
}

impl SolverOptions {
    pub fn new(objective: Objective, scheme: Scheme) -> Self {
        Self { objective, scheme, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau0_grid_points < 2 {
            return Err(config("tau0_grid_points must be >= 2"));
        }
        if !(self.bisection_tol > 0.0 && self.bisection_tol < 1.0) {
            return Err(config("bisection_tol must be in (0, 1)"));
        }
        if self.sca_max_iters == 0 {
            return Err(config("sca_max_iters must be >= 1"));
        }
        Ok(())
    }
}

fn complex_pairs<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|z| [z.re, z.im]))
}

/// Time split, energy beam and uplink powers for one slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationPolicy {
    pub tau0: f64,
    pub tau: Vec<f64>,
    /// Unit-norm beam; the energy matrix is `p_max u u^H`. Serialized as `[re, im]` pairs.
    #[serde(serialize_with = "complex_pairs")]
    pub beam: CVector,
    /// Per-user powers on the uplink eigenmodes, strongest mode first.
    pub lambda: Vec<Vec<f64>>,
    /// Design-time worst-case received RF power per user.
    pub theta: Vec<f64>,
    /// Design-time throughput per user.
    pub rates: Vec<f64>,
}

impl AllocationPolicy {
    pub fn streams(&self) -> Vec<usize> {
        self.lambda.iter().map(|l| l.iter().filter(|&&x| x > 0.0).count()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(rename = "objective")]
    pub objective_value: f64,
    #[serde(rename = "objective_kind")]
    pub objective: Objective,
    pub scheme: Scheme,
    #[serde(flatten)]
    pub policy: AllocationPolicy,
    pub sum_rate: f64,
    pub min_rate: f64,
    /// Rates after scoring the policy under the non-linear model and the
    /// scenario's own uncertainty (or the truth for `perfect_csi`).
    pub achieved_rates: Vec<f64>,
    pub achieved_sum: f64,
    pub achieved_min: f64,
    #[serde(rename = "residuals")]
    pub kkt_residuals: BTreeMap<String, f64>,
    pub sca_iterations: usize,
    pub feasible_users: Vec<bool>,
    /// `(tau0, objective)` for every grid point visited.
    pub tau0_curve: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Harvester used when scoring a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EhMode {
    Nonlinear,
    Linear(f64),
}

/// Channel realization used when scoring a policy.
#[derive(Debug, Clone, Copy)]
pub enum CsiMode<'a> {
    /// Worst case over each user's uncertainty balls.
    WorstCase,
    /// Explicit per-user errors `(dG_k, dH_k)` added to the estimates.
    Sampled(&'a [(crate::linalg::CMatrix, crate::linalg::CMatrix)]),
}
