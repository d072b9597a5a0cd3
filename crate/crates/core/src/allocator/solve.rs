use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use crate::channel::Scenario;
use crate::eh_model::HarvestModel;
use crate::error::{config, domain, Result};
use crate::linalg::{sorted_svd, CMatrix, CVector, C64};

use super::beam;
use super::inner::{Design, Harvest, InnerSolution};
use super::{AllocationPolicy, CsiMode, EhMode, Objective, Scheme, SolveReport, SolverOptions, LINEAR_BASELINE_ETA};

/// Scenario and harvester a scheme designs with.
pub(crate) fn design_for(scn: &Scenario, scheme: Scheme) -> Design {
    match scheme {
        Scheme::Proposed => Design::new(scn.clone(), Harvest::Model(HarvestModel::Nonlinear)),
        Scheme::LinearBaseline => {
            Design::new(scn.clone(), Harvest::Model(HarvestModel::Linear { eta: LINEAR_BASELINE_ETA }))
        }
        Scheme::NonRobust => Design::new(scn.without_downlink_uncertainty(), Harvest::Model(HarvestModel::Nonlinear)),
        Scheme::PerfectCsi => Design::new(scn.perfect_knowledge(), Harvest::Model(HarvestModel::Nonlinear)),
    }
}

/// Scenario a scheme's policy is scored against.
fn scoring_scenario(scn: &Scenario, scheme: Scheme) -> Scenario {
    match scheme {
        Scheme::PerfectCsi => scn.perfect_knowledge(),
        _ => scn.clone(),
    }
}

fn check_tau0(scn: &Scenario, tau0: f64) -> Result<()> {
    if !(0.0..=scn.t_max).contains(&tau0) {
        return Err(domain(format!("tau0 must lie in [0, {}], got {tau0}", scn.t_max)));
    }
    Ok(())
}

fn check_beam(scn: &Scenario, u: &CVector) -> Result<()> {
    if u.len() != scn.n_t {
        return Err(domain(format!("beam has {} entries, expected {}", u.len(), scn.n_t)));
    }
    if (u.norm() - 1.0).abs() > 1e-10 {
        return Err(domain("beam must have unit norm"));
    }
    Ok(())
}

fn policy_of(sol: &InnerSolution) -> AllocationPolicy {
    AllocationPolicy {
        tau0: sol.tau0,
        tau: sol.tau.clone(),
        beam: sol.u.clone(),
        lambda: sol.lambda.clone(),
        theta: sol.theta.clone(),
        rates: sol.rates.clone(),
    }
}

fn sum_min(rates: &[f64]) -> (f64, f64) {
    (rates.iter().sum(), rates.iter().copied().fold(f64::INFINITY, f64::min))
}

fn report(
    scn: &Scenario,
    design: &Design,
    sol: &InnerSolution,
    objective: Objective,
    scheme: Scheme,
    curve: Vec<(f64, f64)>,
) -> Result<SolveReport> {
    let policy = policy_of(sol);
    let achieved_rates =
        evaluate_policy(&policy, &scoring_scenario(scn, scheme), EhMode::Nonlinear, CsiMode::WorstCase)?;
    let (sum_rate, min_rate) = sum_min(&sol.rates);
    let (achieved_sum, achieved_min) = sum_min(&achieved_rates);
    let kkt_residuals = residuals(design, &policy, objective);
    Ok(SolveReport {
        objective_value: sol.objective,
        objective,
        scheme,
        policy,
        sum_rate,
        min_rate,
        achieved_rates,
        achieved_sum,
        achieved_min,
        kkt_residuals,
        sca_iterations: 0,
        feasible_users: sol.feasible.clone(),
        tau0_curve: curve,
        warnings: Vec::new(),
    })
}

/// Inner problem for a fixed charging time and beam, robust design.
pub fn solve_fixed_tau0(scn: &Scenario, tau0: f64, u: &CVector, objective: Objective) -> Result<SolveReport> {
    scn.validate()?;
    check_tau0(scn, tau0)?;
    check_beam(scn, u)?;
    let design = design_for(scn, Scheme::Proposed);
    let sol = design.evaluate(tau0, u, objective);
    report(scn, &design, &sol, objective, Scheme::Proposed, vec![(tau0, sol.objective)])
}

/// Energy beam for one charging time, under the design model of `options.scheme`.
pub fn optimize_beam(scn: &Scenario, tau0: f64, objective: Objective, options: &SolverOptions) -> Result<CVector> {
    scn.validate()?;
    options.validate()?;
    check_tau0(scn, tau0)?;
    let design = design_for(scn, options.scheme);
    let cands = beam::candidates(&design);
    Ok(beam::search(&design, &cands, tau0, objective, options.beam_multistarts, None).u)
}

/// Grid search over `tau0` with a beam search at every grid point.
pub fn solve(scn: &Scenario, options: &SolverOptions) -> Result<SolveReport> {
    scn.validate()?;
    options.validate()?;
    let design = design_for(scn, options.scheme);
    let objective = options.objective;
    let cands = beam::candidates(&design);
    let n = options.tau0_grid_points;
    let mut best: Option<InnerSolution> = None;
    let mut best_idx = 0;
    let mut warm: Option<CVector> = None;
    let mut curve = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let tau0 = scn.t_max * i as f64 / n as f64;
        let sol = beam::search(&design, &cands, tau0, objective, options.beam_multistarts, warm.as_ref());
        curve.push((tau0, sol.objective));
        warm = Some(sol.u.clone());
        if best.as_ref().is_none_or(|b| sol.objective > b.objective) {
            best = Some(sol);
            best_idx = i;
        }
    }
    let mut best = best.expect("grid has at least two points");
    if options.tau0_refine_iters > 0 && best.objective > 0.0 {
        let step = scn.t_max / n as f64;
        let lo = (best_idx as f64 - 1.0).max(0.0) * step;
        let hi = ((best_idx + 1).min(n)) as f64 * step;
        best = refine_tau0(&design, &cands, objective, options, best, lo, hi);
    }
    report(scn, &design, &best, objective, options.scheme, curve)
}

/// Golden-section search on `tau0` in `[lo, hi]`; keeps `best` unless beaten.
fn refine_tau0(
    design: &Design,
    cands: &[CVector],
    objective: Objective,
    options: &SolverOptions,
    mut best: InnerSolution,
    mut lo: f64,
    mut hi: f64,
) -> InnerSolution {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let warm = best.u.clone();
    let at = |tau0: f64| beam::search(design, cands, tau0, objective, options.beam_multistarts, Some(&warm));
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = at(c);
    let mut fd = at(d);
    for _ in 0..options.tau0_refine_iters {
        if fc.objective >= fd.objective {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = at(d);
        }
    }
    for cand in [fc, fd] {
        if cand.objective > best.objective {
            best = cand;
        }
    }
    best
}

/// Same pipeline as [`solve`], restricted to the comparison schemes.
pub fn baseline_solve(scn: &Scenario, options: &SolverOptions) -> Result<SolveReport> {
    if options.scheme == Scheme::Proposed {
        return Err(config("baseline_solve expects linear_baseline, non_robust or perfect_csi"));
    }
    solve(scn, options)
}

/// Successive convex approximation of the fixed-`(tau0, u)` problem, with the
/// logistic curve replaced by its tangent at the turn-on points `b_k`.
pub fn sca_solve_fixed_tau0(
    scn: &Scenario,
    tau0: f64,
    u: &CVector,
    objective: Objective,
    options: &SolverOptions,
) -> Result<SolveReport> {
    let anchors = scn.eh.iter().map(|p| p.b()).collect::<Vec<_>>();
    sca_solve_from(scn, tau0, u, objective, options, &anchors)
}

/// [`sca_solve_fixed_tau0`] starting from explicit anchors.
pub fn sca_solve_from(
    scn: &Scenario,
    tau0: f64,
    u: &CVector,
    objective: Objective,
    options: &SolverOptions,
    anchors: &[f64],
) -> Result<SolveReport> {
    scn.validate()?;
    options.validate()?;
    check_tau0(scn, tau0)?;
    check_beam(scn, u)?;
    if anchors.len() != scn.num_users() || anchors.iter().any(|a| !(*a >= 0.0)) {
        return Err(domain("one nonnegative anchor per user is required"));
    }
    let exact = design_for(scn, Scheme::Proposed);
    let mut anchors = anchors.to_vec();
    let mut warnings = Vec::new();
    let mut gaps = Vec::new();
    let mut prev: Option<f64> = None;
    let mut iterations = 0;
    let mut sol;
    loop {
        iterations += 1;
        for (k, (&a, eh)) in anchors.iter().zip(&scn.eh).enumerate() {
            if a < eh.b() {
                warnings.push(format!(
                    "iteration {iterations}: user {k} anchor {a:.3e} W is below the turn-on point, tangent bound not guaranteed"
                ));
            }
        }
        let surrogate = Design::new(scn.clone(), Harvest::Tangent(anchors.clone()));
        sol = surrogate.evaluate(tau0, u, objective);
        let direct = exact.evaluate(tau0, u, objective).objective;
        gaps.push(sol.objective - direct);
        let fixed =
            sol.theta.iter().zip(&anchors).all(|(t, a)| (t - a).abs() <= 1e-12 * t.abs().max(f64::MIN_POSITIVE));
        let settled = prev.is_some_and(|p| (sol.objective - p).abs() <= 1e-6 * sol.objective.abs());
        if fixed || settled || iterations >= options.sca_max_iters {
            break;
        }
        prev = Some(sol.objective);
        anchors = sol.theta.clone();
    }
    let mut rep = report(scn, &exact, &sol, objective, Scheme::Proposed, vec![(tau0, sol.objective)])?;
    rep.sca_iterations = iterations;
    rep.warnings = warnings;
    rep.warnings.extend(gaps.iter().enumerate().map(|(i, g)| format!("iteration {}: bound gap {g:.3e}", i + 1)));
    Ok(rep)
}

fn eigenvalues_psd(m: &CMatrix) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().map(|x| x.max(0.0)).collect()
}

/// Per-user throughput of `policy` under the given harvester and channel.
///
/// A user whose planned radiated energy exceeds what it actually harvests has
/// all of its powers scaled down to fit.
pub fn evaluate_policy(
    policy: &AllocationPolicy,
    scn: &Scenario,
    eh_mode: EhMode,
    csi_mode: CsiMode<'_>,
) -> Result<Vec<f64>> {
    let k_users = scn.num_users();
    if policy.tau.len() != k_users || policy.lambda.len() != k_users {
        return Err(domain("policy does not match the scenario's user count"));
    }
    if let CsiMode::Sampled(errs) = csi_mode {
        if errs.len() != k_users {
            return Err(domain("one error pair per user is required"));
        }
    }
    check_beam(scn, &policy.beam)?;
    let u = &policy.beam;
    let mut rates = Vec::with_capacity(k_users);
    for (k, user) in scn.users.iter().enumerate() {
        let tau = policy.tau[k];
        let received = match csi_mode {
            CsiMode::WorstCase => {
                let s = (user.g_hat.adjoint() * u).norm();
                let d = (s - user.upsilon).max(0.0);
                scn.p_max * d * d
            }
            CsiMode::Sampled(errs) => scn.p_max * ((&user.g_hat + &errs[k].0).adjoint() * u).norm_squared(),
        };
        let harvested = match eh_mode {
            EhMode::Nonlinear => HarvestModel::Nonlinear.harvest(received, &scn.eh[k]),
            EhMode::Linear(eta) => HarvestModel::Linear { eta }.harvest(received, &scn.eh[k]),
        };
        let available = policy.tau0 * harvested - scn.t_max * scn.p_c[k];
        let planned = tau * scn.eps[k] * policy.lambda[k].iter().sum::<f64>();
        let scale = if planned > available && planned > 0.0 { available.max(0.0) / planned } else { 1.0 };
        if tau <= 0.0 || scale == 0.0 {
            rates.push(0.0);
            continue;
        }
        let lambda: Vec<f64> = policy.lambda[k].iter().map(|l| l * scale).collect();
        let (gamma_hat, left) = sorted_svd(&user.h_hat);
        let bits = match csi_mode {
            CsiMode::WorstCase => gamma_hat
                .iter()
                .zip(&lambda)
                .map(|(g, l)| {
                    let gs = (g - user.rho).max(0.0);
                    (l * gs * gs / scn.sigma_n2).ln_1p()
                })
                .sum::<f64>(),
            CsiMode::Sampled(errs) => {
                // Precoder on the estimated eigenmodes, evaluated on H_hat + dH.
                let h = &user.h_hat + &errs[k].1;
                let n = left.ncols().min(lambda.len());
                let root = CMatrix::from_fn(left.nrows(), n, |r, c| left[(r, c)] * C64::from(lambda[c].sqrt()));
                let m = root.adjoint() * &h * h.adjoint() * &root / C64::from(scn.sigma_n2);
                eigenvalues_psd(&m).iter().map(|x| x.ln_1p()).sum::<f64>()
            }
        };
        rates.push(tau * bits / LN_2);
    }
    Ok(rates)
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::MIN, f64::max);
    let lo = xs.iter().copied().fold(f64::MAX, f64::min);
    if xs.is_empty() || hi <= 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

/// Optimality residuals of a policy for a design; all entries are relative.
pub(crate) fn residuals(design: &Design, policy: &AllocationPolicy, objective: Objective) -> BTreeMap<String, f64> {
    let scn = &design.scn;
    let t = scn.t_max;
    let mut water: f64 = 0.0;
    let mut exhaust: f64 = 0.0;
    let mut tau_k_gap: f64 = 0.0;
    let mut tau_eq = Vec::new();
    let mut marginals = Vec::new();
    let mut any_active = false;
    for (k, prep) in design.users.iter().enumerate() {
        let tau = policy.tau[k];
        if tau <= 0.0 {
            continue;
        }
        any_active = true;
        let (_, theta) = design.received(k, &policy.beam);
        let avail = policy.tau0 * design.harvest(k, theta) - t * scn.p_c[k];
        let lam = &policy.lambda[k];
        let total: f64 = lam.iter().sum();
        let spend = tau * scn.eps[k] * total;
        exhaust = exhaust.max((avail - spend).abs() / avail.abs().max(t * scn.p_c[k]).max(f64::MIN_POSITIVE));
        let t29 = avail / (scn.eps[k] * total);
        tau_k_gap = tau_k_gap.max((tau - t29).abs() / tau);
        tau_eq.push(t29);
        // Implied multiplier per active mode, then complementarity on idle ones.
        let beta: Vec<f64> = lam
            .iter()
            .zip(&prep.gains)
            .filter(|(l, g)| **l > 0.0 && **g > 0.0)
            .map(|(l, g)| 1.0 / (LN_2 * scn.eps[k] * (l + 1.0 / g)))
            .collect();
        water = water.max(spread(&beta));
        let mu = lam
            .iter()
            .zip(&prep.gains)
            .filter(|(l, g)| **l > 0.0 && **g > 0.0)
            .map(|(l, g)| l + 1.0 / g)
            .fold(0.0, f64::max);
        for (l, g) in lam.iter().zip(&prep.gains) {
            if *l == 0.0 && *g > 0.0 && mu > 0.0 {
                water = water.max((mu - 1.0 / g).max(0.0) / mu);
            }
        }
        marginals.push(design.modes[k].marginal_time(total));
    }
    let time_gap = if any_active { (t - policy.tau0 - policy.tau.iter().sum::<f64>()).abs() / t } else { 0.0 };
    let tau0_gap = if any_active { (policy.tau0 - (t - tau_eq.iter().sum::<f64>())).abs() / t } else { 0.0 };
    let mut out = BTreeMap::new();
    out.insert("water_level_spread".into(), water);
    out.insert("budget_exhaustion".into(), exhaust);
    out.insert("tau_k_identity".into(), tau_k_gap);
    out.insert("tau0_identity".into(), tau0_gap);
    out.insert("time_budget".into(), time_gap);
    out.insert("full_power".into(), (policy.beam.norm_squared() - 1.0).abs());
    match objective {
        Objective::MaxSum => {
            out.insert("marginal_rate_spread".into(), spread(&marginals));
        }
        Objective::MaxMin => {
            let nu = policy.rates.iter().copied().fold(f64::INFINITY, f64::min);
            let r = if nu > 0.0 { spread(&policy.rates) } else { 0.0 };
            out.insert("rate_spread".into(), r);
        }
    }
    out
}

/// Optimality residuals of a reported policy against the scheme's design model.
pub fn verify_kkt(report: &SolveReport, scn: &Scenario) -> Result<BTreeMap<String, f64>> {
    if report.policy.tau.len() != scn.num_users() {
        return Err(domain("report does not match the scenario's user count"));
    }
    check_beam(scn, &report.policy.beam)?;
    let design = design_for(scn, report.scheme);
    Ok(residuals(&design, &report.policy, report.objective))
}
