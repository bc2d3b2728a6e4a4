//! Sparse linear regression with the MCP and SCAD folded-concave penalties.
//!
//! The primal-dual pair `(beta, d)` of a penalized least-squares problem is
//! stationary exactly when it is a root of the nonsmooth KKT system
//! `[beta - T(beta + d); G beta + d - X'y]`, where `T` is the penalty's
//! thresholding operator. The [`ssn`] module drives that system with a
//! semi-smooth Newton iteration that pins the inactive and saturated blocks
//! in closed form and solves one small Cholesky system per step; [`cd`] is
//! the classic coordinate-descent baseline over the same operators.
//!
//! [`path`] computes warm-started solution paths over a geometric lambda
//! grid with voting (VSC) and HBIC tuning-parameter selection, [`simgen`]
//! generates correlated synthetic benchmarks, and [`bench`] reproduces the
//! accuracy/timing comparison tables.

pub mod bench;
pub mod cd;
pub mod error;
pub mod kkt;
pub mod path;
pub mod penalty;
pub mod simgen;
pub mod ssn;

pub use error::{Error, Result};
pub use kkt::{
    dual_from_beta, kkt_max_violation, kkt_residual, objective, partition, partition_mcp,
    partition_scad, ActivePartition, PrimalDualState, Problem,
};
pub use penalty::{
    newton_derivative, penalty_derivative, penalty_value, soft_threshold, threshold,
    threshold_vector, PenaltyFamily, PenaltySpec,
};
pub use ssn::{
    solve_reduced_system, ssn_solve, ssn_solve_cold, ssn_step_mcp, ssn_step_scad, SsnOptions,
    SsnSolution, SsnStop,
};

pub use cd::{cd_solve, cd_sweep, CdOptions, CdSolution, CdStop};
pub use path::{
    lambda_grid, select_hbic, select_vsc, solve_path, PathOptions, PathResult, Selected,
    SolverKind,
};
pub use simgen::{
    evaluate_metrics, generate_design, generate_response, generate_signal, Metrics, SimConfig,
};

pub use bench::{run_benchmark, BenchCell, BenchResult, Selector};
