//! Semi-smooth Newton solvers for the MCP and SCAD KKT systems at a fixed
//! `(lambda, gamma)`.
//!
//! One step partitions the indices by `|beta + d|`, pins the closed-form
//! blocks (`beta_B = 0`, the saturated dual block, and for SCAD
//! `d_A1 = lambda * sign(beta + d)`), and solves one small reduced linear
//! system on the active set by Cholesky factorization. The natural stopping
//! rule is repetition of the active-set partition, which makes the iterate an
//! exact fixed point of the step map.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::kkt::{kkt_max_violation, ActivePartition, PrimalDualState, Problem};
use crate::penalty::{sign, PenaltyFamily, PenaltySpec};

/// Solver knobs.
///
/// `max_iter` is the per-solve cap `J` meant for warm-started path points;
/// `cold_max_iter` is the cap used by [`ssn_solve_cold`] for standalone fits
/// where a single Newton step is not enough.
#[derive(Debug, Clone)]
pub struct SsnOptions {
    pub max_iter: usize,
    pub cold_max_iter: usize,
    /// Scale of the diagonal lift retried after a failed factorization,
    /// relative to the mean diagonal of the reduced matrix.
    pub ridge_lift: f64,
    /// Cap on the active-set size before the solve aborts with
    /// [`Error::OversizedActiveSet`]; defaults to `2 * floor(n / ln p)`.
    pub active_cap: Option<usize>,
    /// Record every iterate, for convergence diagnostics.
    pub track_iterates: bool,
}

impl Default for SsnOptions {
    fn default() -> Self {
        Self {
            max_iter: 1,
            cold_max_iter: 50,
            ridge_lift: 1e-8,
            active_cap: None,
            track_iterates: false,
        }
    }
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsnStop {
    /// The active-set partition repeated; the iterate is a fixed point.
    ActiveSetFixed,
    /// The iteration cap (or the cycling guard) triggered first.
    IterCap,
}

/// Solver output. `kkt_inf` is recomputed from scratch at exit.
#[derive(Debug, Clone)]
pub struct SsnSolution {
    pub beta: Array1<f64>,
    pub d: Array1<f64>,
    pub iters: usize,
    pub converged_by: SsnStop,
    pub kkt_inf: f64,
    /// True when any step needed the diagonal lift to factor its reduced
    /// system (the regularity condition was violated numerically).
    pub ridge_lifted: bool,
    /// Iterate trail `(beta, d)` including the initial point, present when
    /// `SsnOptions::track_iterates` is set.
    pub iterates: Option<Vec<(Array1<f64>, Array1<f64>)>>,
}

impl SsnSolution {
    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn cholesky_in_place(a: &mut Array2<f64>) -> bool {
    let m = a.nrows();
    let scale = (0..m).fold(0.0f64, |s, i| s.max(a[(i, i)].abs())).max(1.0);
    let floor = 1e-14 * scale;
    for j in 0..m {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= a[(j, k)] * a[(j, k)];
        }
        if diag.is_nan() || diag <= floor {
            return false;
        }
        let l_jj = diag.sqrt();
        a[(j, j)] = l_jj;
        for i in (j + 1)..m {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = v / l_jj;
        }
    }
    true
}

fn cholesky_solve(l: &Array2<f64>, rhs: &Array1<f64>) -> Array1<f64> {
    let m = l.nrows();
    let mut x = rhs.clone();
    for i in 0..m {
        for k in 0..i {
            x[i] -= l[(i, k)] * x[k];
        }
        x[i] /= l[(i, i)];
    }
    for i in (0..m).rev() {
        for k in (i + 1)..m {
            x[i] -= l[(k, i)] * x[k];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solves the symmetric positive definite reduced system by Cholesky.
///
/// If the plain factorization fails, retries once with
/// `ridge_lift * trace/m` added to the diagonal; the returned flag records
/// whether the lift was needed.
pub fn solve_reduced_system(
    gram_block: &Array2<f64>,
    rhs: &Array1<f64>,
    ridge_lift: f64,
) -> Result<(Array1<f64>, bool)> {
    let m = gram_block.nrows();
    if gram_block.ncols() != m || rhs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "reduced system is {}x{} with rhs of length {}",
            m,
            gram_block.ncols(),
            rhs.len()
        )));
    }
    if m == 0 {
        return Ok((Array1::zeros(0), false));
    }
    let mut l = gram_block.clone();
    if cholesky_in_place(&mut l) {
        return Ok((cholesky_solve(&l, rhs), false));
    }
    let trace: f64 = (0..m).map(|i| gram_block[(i, i)]).sum();
    let lift = ridge_lift * (trace / m as f64).abs().max(f64::MIN_POSITIVE);
    let mut l = gram_block.clone();
    for i in 0..m {
        l[(i, i)] += lift;
    }
    if cholesky_in_place(&mut l) {
        return Ok((cholesky_solve(&l, rhs), true));
    }
    Err(Error::SingularReducedSystem { size: m })
}

/// Gathers the active columns of `X` into an `n x |A|` block.
fn gather_columns(problem: &Problem, active: &[usize]) -> Array2<f64> {
    let n = problem.n();
    let mut xa = Array2::zeros((n, active.len()));
    for (k, &j) in active.iter().enumerate() {
        xa.column_mut(k).assign(&problem.x().column(j));
    }
    xa
}

struct StepOutcome {
    state: PrimalDualState,
    lifted: bool,
}

fn step_impl(
    problem: &Problem,
    state: &PrimalDualState,
    spec: &PenaltySpec,
    ridge_lift: f64,
) -> Result<StepOutcome> {
    let p = problem.p();
    if state.beta.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "state has {} entries, problem has p = {}",
            state.beta.len(),
            p
        )));
    }
    let part = &state.partition;
    let active = part.active();
    let m = active.len();
    let na1 = part.a1.len();
    let na2 = part.a2.len();
    let w = &state.beta + &state.d;
    let (lambda, gamma) = (spec.lambda(), spec.gamma());

    // Reduced Gram block with the family's diagonal correction, and the
    // right-hand side absorbing the pinned dual blocks.
    let xa = gather_columns(problem, &active);
    let mut gram = xa.t().dot(&xa);
    let mut rhs = Array1::zeros(m);
    match spec.family() {
        PenaltyFamily::Mcp => {
            for k in 0..na1 {
                gram[(k, k)] -= 1.0 / gamma;
                rhs[k] = problem.y_tilde()[active[k]] - lambda * sign(w[active[k]]);
            }
            for k in na1..m {
                rhs[k] = problem.y_tilde()[active[k]];
            }
        }
        PenaltyFamily::Scad => {
            for k in 0..na1 {
                rhs[k] = problem.y_tilde()[active[k]] - lambda * sign(w[active[k]]);
            }
            for k in na1..(na1 + na2) {
                gram[(k, k)] -= 1.0 / (gamma - 1.0);
                rhs[k] = problem.y_tilde()[active[k]]
                    - gamma * lambda / (gamma - 1.0) * sign(w[active[k]]);
            }
            for k in (na1 + na2)..m {
                rhs[k] = problem.y_tilde()[active[k]];
            }
        }
    }

    let (beta_a, lifted) = solve_reduced_system(&gram, &rhs, ridge_lift)?;

    let mut beta = Array1::zeros(p);
    let mut d = Array1::zeros(p);
    for (k, &j) in active.iter().enumerate() {
        beta[j] = beta_a[k];
    }
    match spec.family() {
        PenaltyFamily::Mcp => {
            // d_A1 = -beta_A1/gamma + lambda*sign(w); d_A2 = 0.
            for k in 0..na1 {
                let j = active[k];
                d[j] = -beta_a[k] / gamma + lambda * sign(w[j]);
            }
        }
        PenaltyFamily::Scad => {
            // d_A1 = lambda*sign(w); d_A2 = -beta_A2/(gamma-1) + s_A2; d_A3 = 0.
            for &j in &active[..na1] {
                d[j] = lambda * sign(w[j]);
            }
            for k in na1..(na1 + na2) {
                let j = active[k];
                d[j] = -beta_a[k] / (gamma - 1.0) + gamma * lambda / (gamma - 1.0) * sign(w[j]);
            }
        }
    }
    // d_B = y_tilde_B - G_BA beta_A, via the n-vector u = X_A beta_A.
    let u = xa.dot(&beta_a);
    for &j in &part.b {
        d[j] = problem.y_tilde()[j] - problem.x().column(j).dot(&u);
    }

    let mut next = PrimalDualState::new(beta, d, spec)?;
    next.iter = state.iter + 1;
    Ok(StepOutcome {
        state: next,
        lifted,
    })
}

/// One semi-smooth Newton step for the MCP system.
pub fn ssn_step_mcp(
    problem: &Problem,
    state: &PrimalDualState,
    spec: &PenaltySpec,
    ridge_lift: f64,
) -> Result<PrimalDualState> {
    if spec.family() != PenaltyFamily::Mcp {
        return Err(Error::FamilyMismatch {
            expected: PenaltyFamily::Mcp,
            got: spec.family(),
        });
    }
    Ok(step_impl(problem, state, spec, ridge_lift)?.state)
}

/// One semi-smooth Newton step for the SCAD system.
pub fn ssn_step_scad(
    problem: &Problem,
    state: &PrimalDualState,
    spec: &PenaltySpec,
    ridge_lift: f64,
) -> Result<PrimalDualState> {
    if spec.family() != PenaltyFamily::Scad {
        return Err(Error::FamilyMismatch {
            expected: PenaltyFamily::Scad,
            got: spec.family(),
        });
    }
    Ok(step_impl(problem, state, spec, ridge_lift)?.state)
}

/// Default guard on the active-set size: `min(n, 2*floor(n / ln p))`.
pub fn default_active_cap(n: usize, p: usize) -> usize {
    let by_log = if p >= 2 {
        (2.0 * (n as f64 / (p as f64).ln())).floor() as usize
    } else {
        n
    };
    n.min(by_log.max(1))
}

/// Runs Newton steps from `init` until the partition repeats or `max_iter`
/// is hit. Use for warm-started path points; see [`ssn_solve_cold`] for
/// standalone fits.
pub fn ssn_solve(
    problem: &Problem,
    spec: &PenaltySpec,
    init: PrimalDualState,
    opts: &SsnOptions,
) -> Result<SsnSolution> {
    run(problem, spec, init, opts.max_iter.max(1), opts)
}

/// Cold-start fit from `(0, y_tilde)` with the larger `cold_max_iter` cap.
pub fn ssn_solve_cold(
    problem: &Problem,
    spec: &PenaltySpec,
    opts: &SsnOptions,
) -> Result<SsnSolution> {
    let init = PrimalDualState::zero(problem, spec);
    run(problem, spec, init, opts.cold_max_iter.max(1), opts)
}

fn run(
    problem: &Problem,
    spec: &PenaltySpec,
    init: PrimalDualState,
    cap: usize,
    opts: &SsnOptions,
) -> Result<SsnSolution> {
    let active_cap = problem
        .n()
        .min(opts.active_cap.unwrap_or_else(|| default_active_cap(problem.n(), problem.p())));
    let mut history = if opts.track_iterates {
        Some(vec![(init.beta.clone(), init.d.clone())])
    } else {
        None
    };
    let mut state = init;
    let mut prev_partition: Option<ActivePartition> = None;
    let mut lifted_any = false;
    let mut stop = SsnStop::IterCap;
    let mut iters = 0;

    for k in 0..cap {
        let active = state.partition.active_len();
        if active > active_cap {
            return Err(Error::OversizedActiveSet {
                active,
                cap: active_cap,
            });
        }
        let out = step_impl(problem, &state, spec, opts.ridge_lift)?;
        lifted_any |= out.lifted;
        iters = k + 1;
        if let Some(h) = history.as_mut() {
            h.push((out.state.beta.clone(), out.state.d.clone()));
        }
        if out.state.partition == state.partition {
            state = out.state;
            stop = SsnStop::ActiveSetFixed;
            break;
        }
        // Two-cycle guard: nonconvexity permits oscillation far from a
        // root; keep whichever iterate violates the KKT system less.
        if prev_partition.as_ref() == Some(&out.state.partition) {
            let f_cur = kkt_max_violation(problem, &state, spec)?;
            let f_next = kkt_max_violation(problem, &out.state, spec)?;
            if f_next <= f_cur {
                state = out.state;
            }
            break;
        }
        prev_partition = Some(std::mem::take(&mut state.partition));
        state = out.state;
    }

    let kkt_inf = kkt_max_violation(problem, &state, spec)?;
    Ok(SsnSolution {
        beta: state.beta,
        d: state.d,
        iters,
        converged_by: stop,
        kkt_inf,
        ridge_lifted: lifted_any,
        iterates: history,
    })
}
