//! Coordinate-descent baseline for the same penalized problems.
//!
//! Cycles through the coordinates in fixed ascending order, each update an
//! exact scalar minimization through the thresholding operator, with the
//! residual maintained incrementally.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::kkt::{dual_from_beta, kkt_max_violation, PrimalDualState, Problem};
use crate::penalty::{threshold, PenaltySpec};

#[derive(Debug, Clone)]
pub struct CdOptions {
    /// Safety cap on full sweeps.
    pub max_sweeps: usize,
    /// Stop when the sweep step `||beta_new - beta_old||_2` falls below this.
    pub delta: f64,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 10_000,
            delta: 1e-3,
        }
    }
}

/// Why the sweep loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStop {
    /// `||beta_new - beta_old||_2 <= delta`.
    DeltaConverged,
    /// The sweep cap triggered first.
    SweepCap,
}

#[derive(Debug, Clone)]
pub struct CdSolution {
    pub beta: Array1<f64>,
    pub d: Array1<f64>,
    pub sweeps: usize,
    pub converged_by: CdStop,
    pub kkt_inf: f64,
}

impl CdSolution {
    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One full sweep over the coordinates. `residual` must equal `y - X beta`
/// on entry and is kept in sync; returns `||beta_new - beta_old||_2`.
pub fn cd_sweep(
    problem: &Problem,
    beta: &mut Array1<f64>,
    residual: &mut Array1<f64>,
    spec: &PenaltySpec,
) -> Result<f64> {
    let p = problem.p();
    if beta.len() != p || residual.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries and residual {}, problem is {}x{}",
            beta.len(),
            residual.len(),
            problem.n(),
            p
        )));
    }
    let mut step_sq = 0.0;
    for i in 0..p {
        let col = problem.x().column(i);
        let z = col.dot(residual) + beta[i];
        let new = threshold(z, spec);
        let diff = new - beta[i];
        if diff != 0.0 {
            residual.scaled_add(-diff, &col);
            beta[i] = new;
            step_sq += diff * diff;
        }
    }
    Ok(step_sq.sqrt())
}

/// Runs sweeps from `init` (or zero) until the step norm falls below
/// `delta` or the sweep cap is hit. The dual is recomputed from scratch at
/// exit, as is the KKT violation.
pub fn cd_solve(
    problem: &Problem,
    spec: &PenaltySpec,
    init: Option<&Array1<f64>>,
    opts: &CdOptions,
) -> Result<CdSolution> {
    let p = problem.p();
    let mut beta = match init {
        Some(b) if b.len() != p => {
            return Err(Error::DimensionMismatch(format!(
                "init has {} entries, problem has p = {}",
                b.len(),
                p
            )));
        }
        Some(b) => b.clone(),
        None => Array1::zeros(p),
    };
    let mut residual = problem.y() - &problem.matvec(&beta)?;
    let mut sweeps = 0;
    let mut stop = CdStop::SweepCap;
    while sweeps < opts.max_sweeps.max(1) {
        let step = cd_sweep(problem, &mut beta, &mut residual, spec)?;
        sweeps += 1;
        if step <= opts.delta {
            stop = CdStop::DeltaConverged;
            break;
        }
    }
    let d = dual_from_beta(problem, &beta)?;
    let state = PrimalDualState::new(beta, d, spec)?;
    let kkt_inf = kkt_max_violation(problem, &state, spec)?;
    Ok(CdSolution {
        beta: state.beta,
        d: state.d,
        sweeps,
        converged_by: stop,
        kkt_inf,
    })
}
