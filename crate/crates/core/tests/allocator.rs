mod common;

use common::{brute_force, desk, real_two_antenna};
use wpcn_core::allocator::{baseline_solve, solve, verify_kkt, Objective, Scheme, SolverOptions};
use wpcn_core::channel::{best_s_procedure_margin, generate_scenario, s_procedure_certify, ScenarioConfig};
use wpcn_core::eh_model::harvest_nonlinear;
use wpcn_core::linalg::C64;

fn opts(objective: Objective, scheme: Scheme) -> SolverOptions {
    SolverOptions::new(objective, scheme)
}

#[test]
fn finer_tau0_grid_changes_little() {
    for seed in 0..20 {
        let scn = desk(4, seed);
        let coarse = solve(&scn, &SolverOptions::default()).unwrap().objective_value;
        let fine =
            solve(&scn, &SolverOptions { tau0_grid_points: 200, ..SolverOptions::default() }).unwrap().objective_value;
        assert!((fine - coarse).abs() < 0.01 * fine, "seed {seed}: {coarse} vs {fine}");
    }
}

#[test]
fn more_power_never_hurts() {
    for seed in 0..10 {
        let mut cfg = ScenarioConfig::default();
        let base = generate_scenario(&cfg, seed).unwrap();
        cfg.power.p_max_dbm += 10.0 * 2f64.log10();
        let doubled = generate_scenario(&cfg, seed).unwrap();
        for objective in Objective::ALL {
            let a = solve(&base, &opts(objective, Scheme::Proposed)).unwrap().objective_value;
            let b = solve(&doubled, &opts(objective, Scheme::Proposed)).unwrap().objective_value;
            assert!(b >= a * (1.0 - 1e-9), "seed {seed} {objective}: {a} -> {b}");
        }
    }
}

#[test]
fn longer_slot_and_cleaner_estimates_never_hurt() {
    for seed in 0..6 {
        let mut cfg = ScenarioConfig::default();
        let base = generate_scenario(&cfg, seed).unwrap();
        let a = solve(&base, &SolverOptions::default()).unwrap().objective_value;
        let mut longer = base.clone();
        longer.t_max = 2.0;
        let b = solve(&longer, &SolverOptions::default()).unwrap().objective_value;
        assert!(b >= a * (1.0 - 1e-9), "seed {seed}: T_max {a} -> {b}");
        cfg.csi.sigma_est2 = 0.1;
        let noisier = generate_scenario(&cfg, seed).unwrap();
        let c = solve(&noisier, &SolverOptions::default()).unwrap().objective_value;
        assert!(c <= a * (1.0 + 1e-9), "seed {seed}: sigma {a} -> {c}");
    }
}

#[test]
fn scheme_and_objective_orderings_per_instance() {
    for seed in 0..10 {
        let scn = desk(4, seed);
        let proposed = solve(&scn, &opts(Objective::MaxSum, Scheme::Proposed)).unwrap();
        let perfect = baseline_solve(&scn, &opts(Objective::MaxSum, Scheme::PerfectCsi)).unwrap();
        assert!(
            perfect.achieved_sum >= proposed.achieved_sum - 1e-6,
            "seed {seed}: perfect {} < proposed {}",
            perfect.achieved_sum,
            proposed.achieved_sum
        );
        let fair = solve(&scn, &opts(Objective::MaxMin, Scheme::Proposed)).unwrap();
        assert!(proposed.sum_rate >= fair.sum_rate * (1.0 - 1e-9));
        if fair.objective_value > 0.0 {
            for r in &fair.policy.rates {
                assert!((r - fair.objective_value).abs() <= 1e-6 * fair.objective_value);
            }
        }
    }
}

#[test]
fn policies_are_feasible_and_certified() {
    for seed in 0..10 {
        let scn = desk(3, seed);
        for objective in Objective::ALL {
            let r = solve(&scn, &opts(objective, Scheme::Proposed)).unwrap();
            let p = &r.policy;
            assert!(p.tau0 + p.tau.iter().sum::<f64>() <= scn.t_max + 1e-9);
            assert!(p.tau0 >= 0.0 && p.tau.iter().all(|&t| t >= 0.0));
            assert!(p.lambda.iter().flatten().all(|&l| l >= 0.0));
            assert!((p.beam.norm() - 1.0).abs() < 1e-12);
            let v = &p.beam * p.beam.adjoint() * C64::from(scn.p_max);
            for (k, user) in scn.users.iter().enumerate() {
                let spend = scn.t_max * scn.p_c[k] + p.tau[k] * scn.eps[k] * p.lambda[k].iter().sum::<f64>();
                let got = p.tau0 * harvest_nonlinear(p.theta[k], &scn.eh[k]).unwrap();
                if p.tau[k] > 0.0 {
                    assert!(spend <= got + 1e-9);
                }
                assert!(p.lambda[k].iter().filter(|&&l| l > 0.0).count() <= scn.n_u.min(scn.n_r));
                if p.theta[k] > 0.0 {
                    let t = p.theta[k] * (1.0 - 1e-6);
                    let (omega, _, _) = best_s_procedure_margin(&v, t, &user.g_hat, user.upsilon).unwrap();
                    assert!(s_procedure_certify(&v, omega, t, &user.g_hat, user.upsilon).unwrap());
                }
            }
            let res = verify_kkt(&r, &scn).unwrap();
            assert!(res.values().all(|&v| v < 1e-6), "{res:?}");
        }
    }
}

#[test]
fn end_to_end_matches_brute_force_on_small_instances() {
    for seed in 0..4u64 {
        let k = 1 + (seed as usize % 2);
        let objective = if seed < 2 { Objective::MaxSum } else { Objective::MaxMin };
        let scn = real_two_antenna(k, 100 + seed);
        let got = solve(&scn, &opts(objective, Scheme::Proposed)).unwrap().objective_value;
        let oracle = brute_force(&scn, objective);
        assert!(oracle > 0.0);
        assert!((got - oracle).abs() <= 0.01 * oracle, "seed {seed}: solve {got} vs oracle {oracle}");
    }
}
