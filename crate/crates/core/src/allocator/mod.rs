//! Resource allocation: WET/WIT time split, uplink power and energy beam.

mod roots;
mod time;
mod waterfill;

pub use time::{allocate_time_maxmin, allocate_time_sum, user_rate};
pub use waterfill::waterfill;
mod beam;
mod inner;
mod types;

pub use types::{
    AllocationPolicy, CsiMode, EhMode, Objective, Scheme, SolveReport, SolverOptions, LINEAR_BASELINE_ETA,
};
mod solve;

pub use solve::{
    baseline_solve, evaluate_policy, optimize_beam, sca_solve_fixed_tau0, sca_solve_from, solve, solve_fixed_tau0,
    verify_kkt,
};
