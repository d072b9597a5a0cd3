//! Oracle and invariant suites shared by the CLI and the acceptance tests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::{solve, verify_kkt, waterfill, Objective, SolverOptions};
use crate::channel::uncertainty::draw_ball;
use crate::channel::{
    adversarial_downlink_error, best_s_procedure_margin, generate_scenario, worst_case_harvest_power, ScenarioConfig,
};
use crate::error::{config, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Relative slack used by the PSD test inside the S-procedure.
const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Waterfill,
    WorstCase,
    Kkt,
    SProcedure,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Waterfill, Suite::WorstCase, Suite::Kkt, Suite::SProcedure];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Waterfill => "waterfill",
            Suite::WorstCase => "worst_case",
            Suite::Kkt => "kkt",
            Suite::SProcedure => "s_procedure",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = crate::WpcnError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| {
            config(format!("unknown suite {s:?}; expected one of waterfill, worst_case, kkt, s_procedure"))
        })
    }
}

/// Outcome of one named invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, detail }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let v = random_matrix(rng, n, 1).column(0).into_owned();
    let norm = v.norm();
    v / C64::from(norm)
}

fn capacity(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| (g * p).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Best split of `budget` over up to three modes on a grid of about `points`
/// evaluations: a coarse pass over the simplex, then the same count again in a
/// window around the coarse winner.
fn grid_capacity(gains: &[f64], budget: f64, points: usize) -> f64 {
    let eval = |a: f64, b: f64| -> f64 {
        match gains.len() {
            1 => capacity(gains, &[budget]),
            2 => capacity(gains, &[a, budget - a]),
            _ => capacity(gains, &[a, b, (budget - a - b).max(0.0)]),
        }
    };
    match gains.len() {
        1 => eval(budget, 0.0),
        2 => {
            let n = points / 2;
            let h = budget / n as f64;
            let coarse = (0..=n).map(|i| i as f64 * h).fold((0.0, f64::MIN), |acc, a| {
                let v = eval(a, 0.0);
                if v > acc.1 {
                    (a, v)
                } else {
                    acc
                }
            });
            let (lo, hi) = ((coarse.0 - h).max(0.0), (coarse.0 + h).min(budget));
            (0..=n).map(|i| eval(lo + (hi - lo) * i as f64 / n as f64, 0.0)).fold(coarse.1, f64::max)
        }
        3 => {
            let side = ((points / 2) as f64).sqrt() as usize;
            let h = budget / side as f64;
            let mut best = (0.0, 0.0, f64::MIN);
            for i in 0..=side {
                for j in 0..=side - i {
                    let (a, b) = (i as f64 * h, j as f64 * h);
                    let v = eval(a, b);
                    if v > best.2 {
                        best = (a, b, v);
                    }
                }
            }
            let (a0, b0) = ((best.0 - 2.0 * h).max(0.0), (best.1 - 2.0 * h).max(0.0));
            let w = 4.0 * h;
            let mut top = best.2;
            for i in 0..=side {
                for j in 0..=side {
                    let (a, b) = (a0 + w * i as f64 / side as f64, b0 + w * j as f64 / side as f64);
                    if a + b <= budget {
                        top = top.max(eval(a, b));
                    }
                }
            }
            top
        }
        _ => unreachable!("at most three modes"),
    }
}

/// Water-filling against a grid search on random instances with 1 to 3 modes.
pub fn waterfill_oracle(instances: usize, points: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(1..=3);
        let gains: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 0.1, 10.0)).collect();
        let budget = log_uniform(&mut rng, 0.1, 2.0);
        let (powers, _) = waterfill(&gains, budget);
        let gap = (capacity(&gains, &powers) - grid_capacity(&gains, budget, points)).abs();
        worst = worst.max(gap);
    }
    Check::new(
        "waterfill_grid_oracle",
        worst <= 1e-6,
        format!("{instances} instances, worst objective gap {worst:.3e} (limit 1e-6)"),
    )
}

/// Closed-form worst-case harvest against sampled perturbations and the
/// adversarial witness.
pub fn worst_case_sampling(instances: usize, draws: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut deepest: f64 = 0.0;
    let mut witness_gap: f64 = 0.0;
    for _ in 0..instances {
        let n_t = rng.random_range(1..=4);
        let n_u = rng.random_range(1..=3);
        let g_hat = random_matrix(&mut rng, n_t, n_u);
        let u = random_unit(&mut rng, n_t);
        let p = log_uniform(&mut rng, 0.01, 10.0);
        let s = (g_hat.adjoint() * &u).norm();
        let upsilon = rng.random::<f64>() * 1.2 * s;
        let closed = worst_case_harvest_power(&g_hat, &u, p, upsilon).expect("unit beam");
        let scale = p * s * s;
        for _ in 0..draws {
            let (dg, _) = draw_ball(&mut rng, n_t, n_u, upsilon);
            let got = p * ((&g_hat + dg).adjoint() * &u).norm_squared();
            if got < closed - 1e-12 * scale {
                violations += 1;
                deepest = deepest.max((closed - got) / scale);
            }
        }
        let w = adversarial_downlink_error(&g_hat, &u, upsilon);
        let got = p * ((&g_hat + &w).adjoint() * &u).norm_squared();
        let over = (w.norm() - upsilon).max(0.0) / upsilon.max(f64::MIN_POSITIVE);
        let rel = (got - closed).abs() / closed.max(1e-300);
        let gap = if closed > 0.0 { rel } else { got / scale };
        witness_gap = witness_gap.max(gap).max(over);
    }
    vec![
        Check::new(
            "worst_case_lower_bound",
            violations == 0,
            format!("{instances} instances x {draws} draws, {violations} samples below the closed form (deepest {deepest:.3e})"),
        ),
        Check::new(
            "worst_case_witness",
            witness_gap <= 1e-9,
            format!("worst relative witness gap {witness_gap:.3e} (limit 1e-9)"),
        ),
    ]
}

/// The closed-form worst case, lowered by a `1e-6` relative margin, must admit
/// an S-procedure certificate; raised by 10% it must not.
pub fn s_procedure_crosscheck(instances: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below_ok = 0usize;
    let mut above_rejected = 0usize;
    let mut errors = Vec::new();
    for i in 0..instances {
        let n_t = rng.random_range(2..=4);
        let n_u = rng.random_range(1..=2);
        let g_hat = random_matrix(&mut rng, n_t, n_u);
        let u = random_unit(&mut rng, n_t);
        let p = log_uniform(&mut rng, 0.1, 10.0);
        let s = (g_hat.adjoint() * &u).norm();
        let upsilon = (0.05 + 0.5 * rng.random::<f64>()) * s;
        let v = (&u * u.adjoint()) * C64::from(p);
        let closed = worst_case_harvest_power(&g_hat, &u, p, upsilon).expect("unit beam");
        let certified = |theta: f64| -> Result<bool> {
            let (_, lo, norm) = best_s_procedure_margin(&v, theta, &g_hat, upsilon)?;
            Ok(lo >= -PSD_TOL * norm)
        };
        match (certified(closed * (1.0 - 1e-6)), certified(closed * 1.1)) {
            (Ok(a), Ok(b)) => {
                below_ok += a as usize;
                above_rejected += (!b) as usize;
            }
            (Err(e), _) | (_, Err(e)) => errors.push(format!("instance {i}: {e}")),
        }
    }
    let err = if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(", ")) };
    vec![
        Check::new(
            "s_procedure_certifies_below",
            below_ok == instances,
            format!("{below_ok}/{instances} certified at 1e-6 below the closed form{err}"),
        ),
        Check::new(
            "s_procedure_rejects_above",
            above_rejected == instances,
            format!("{above_rejected}/{instances} rejected at 10% above the closed form{err}"),
        ),
    ]
}

/// Solves `instances` scenarios drawn from `cfg` under both objectives and
/// checks every optimality residual against `tol`.
pub fn kkt_suite(
    cfg: &ScenarioConfig,
    options: &SolverOptions,
    instances: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for objective in Objective::ALL {
        let opts = SolverOptions { objective, ..options.clone() };
        let mut worst: std::collections::BTreeMap<String, f64> = Default::default();
        for i in 0..instances {
            let scn = generate_scenario(cfg, seed.wrapping_add(i as u64))?;
            let report = solve(&scn, &opts)?;
            for (name, v) in verify_kkt(&report, &scn)? {
                let e = worst.entry(name).or_insert(0.0);
                *e = e.max(v);
            }
        }
        for (name, v) in worst {
            out.push(Check::new(
                format!("kkt_{objective}_{name}"),
                v < tol,
                format!("{instances} instances, worst {v:.3e} (limit {tol:.0e})"),
            ));
        }
    }
    Ok(out)
}

/// Default tolerance on relative optimality residuals.
pub const KKT_TOL: f64 = 1e-6;

/// Runs one suite at smoke-test size; `kkt_tol` applies to the KKT suite.
pub fn run_suite(
    suite: Suite,
    cfg: &ScenarioConfig,
    options: &SolverOptions,
    seed: u64,
    kkt_tol: f64,
) -> Result<Vec<Check>> {
    Ok(match suite {
        Suite::Waterfill => vec![waterfill_oracle(20, 200_000, seed)],
        Suite::WorstCase => worst_case_sampling(10, 1000, seed),
        Suite::SProcedure => s_procedure_crosscheck(5, seed),
        Suite::Kkt => kkt_suite(cfg, options, 3, seed, kkt_tol)?,
    })
}
