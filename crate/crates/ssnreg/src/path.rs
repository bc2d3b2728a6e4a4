//! Warm-started solution paths over a geometric lambda grid, with VSC and
//! HBIC tuning-parameter selection.
//!
//! The grid starts at `lambda_max = ||X'y||_inf`, where the zero solution is
//! exact, and each point is solved from the previous solution. The path
//! stops once the support outgrows `floor(n / ln p)`: past that the reduced
//! systems lose identifiability and no selector will pick such a point.

use ndarray::Array1;

use crate::cd::{cd_solve, CdOptions, CdStop};
use crate::error::{Error, Result};
use crate::kkt::{PrimalDualState, Problem};
use crate::penalty::{PenaltyFamily, PenaltySpec};
use crate::ssn::{ssn_solve, SsnOptions, SsnStop};

/// Which solver advances the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ssn,
    Cd,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Ssn => write!(f, "ssn"),
            SolverKind::Cd => write!(f, "cd"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathOptions {
    /// Ratio `lambda_min / lambda_max`.
    pub alpha: f64,
    /// Number of geometric subdivisions; the grid has `m + 1` points.
    pub m: usize,
    /// Per-lambda SSN iteration cap (warm starts make 1 work well).
    pub j: usize,
    /// Multiplier on `floor(n / ln p)` for the early-termination threshold.
    pub support_cap_mult: f64,
    /// Forwarded to the SSN reduced solve.
    pub ridge_lift: f64,
    /// Per-lambda coordinate-descent options.
    pub cd: CdOptions,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            alpha: 1e-5,
            m: 100,
            j: 1,
            support_cap_mult: 1.0,
            ridge_lift: 1e-8,
            cd: CdOptions::default(),
        }
    }
}

/// A per-lambda solver failure recorded on a truncated path.
#[derive(Debug, Clone)]
pub struct PathFailure {
    pub index: usize,
    pub lambda: f64,
    pub error: Error,
}

/// The computed path: per-lambda solutions and diagnostics.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub betas: Vec<Array1<f64>>,
    pub iters: Vec<usize>,
    pub kkt_inf: Vec<f64>,
    pub support_size: Vec<usize>,
    pub rss: Vec<f64>,
    /// Per point: the solver met its own convergence rule (SSN: the active
    /// set repeated; CD: the sweep step fell below delta).
    pub converged: Vec<bool>,
    /// `floor(n / ln p)`, the selector's largest admissible support size.
    pub support_cap: usize,
    pub terminated_early: bool,
    pub failure: Option<PathFailure>,
}

impl PathResult {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// A selected path point.
#[derive(Debug, Clone)]
pub struct Selected {
    pub index: usize,
    pub lambda: f64,
    pub beta: Array1<f64>,
    pub support_size: usize,
}

/// Geometric grid `lambda_t = lambda_0 * rho^t`, `t = 0..=m`, with
/// `lambda_0 = ||X'y||_inf` and `rho = alpha^(1/m)`.
pub fn lambda_grid(problem: &Problem, opts: &PathOptions) -> Result<Vec<f64>> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidOptions(format!(
            "alpha must lie in (0, 1), got {}",
            opts.alpha
        )));
    }
    if opts.m < 1 {
        return Err(Error::InvalidOptions("grid size m must be >= 1".into()));
    }
    let lambda0 = problem.lambda_max();
    if lambda0 <= 0.0 {
        return Err(Error::EmptySignal);
    }
    let rho = (-((1.0f64).ln() - opts.alpha.ln()) / opts.m as f64).exp();
    Ok((0..=opts.m).map(|t| lambda0 * rho.powi(t as i32)).collect())
}

/// `floor(n / ln p)`, clamped to at least 1.
pub fn support_cap(n: usize, p: usize) -> usize {
    if p < 2 {
        return n.max(1);
    }
    ((n as f64 / (p as f64).ln()).floor() as usize).max(1)
}

/// `||y - X beta||^2` from the dual identity `d = y_tilde - G beta`:
/// `rss = ||y||^2 - beta'y_tilde - beta'd`, an O(p) evaluation.
fn rss_from_dual(y_sq: f64, y_tilde: &Array1<f64>, beta: &Array1<f64>, d: &Array1<f64>) -> f64 {
    (y_sq - beta.dot(y_tilde) - beta.dot(d)).max(0.0)
}

/// Runs the warm-started path for one penalty family at fixed gamma.
pub fn solve_path(
    problem: &Problem,
    family: PenaltyFamily,
    gamma: f64,
    solver: SolverKind,
    opts: &PathOptions,
) -> Result<PathResult> {
    let lambdas = lambda_grid(problem, opts)?;
    let cap = support_cap(problem.n(), problem.p());
    let stop_above = ((cap as f64) * opts.support_cap_mult).floor() as usize;
    let y_sq = problem.y().dot(problem.y());

    let ssn_opts = SsnOptions {
        max_iter: opts.j.max(1),
        ridge_lift: opts.ridge_lift,
        ..SsnOptions::default()
    };

    let mut result = PathResult {
        lambdas: Vec::new(),
        betas: Vec::new(),
        iters: Vec::new(),
        kkt_inf: Vec::new(),
        support_size: Vec::new(),
        rss: Vec::new(),
        converged: Vec::new(),
        support_cap: cap,
        terminated_early: false,
        failure: None,
    };

    let mut beta_prev = Array1::zeros(problem.p());
    let mut d_prev = problem.y_tilde().clone();

    for (t, &lambda) in lambdas.iter().enumerate() {
        let spec = PenaltySpec::new(family, lambda, gamma)?;
        let solved = match solver {
            SolverKind::Ssn => {
                PrimalDualState::new(beta_prev.clone(), d_prev.clone(), &spec).and_then(|init| {
                    ssn_solve(problem, &spec, init, &ssn_opts).map(|sol| {
                        let converged = sol.converged_by == SsnStop::ActiveSetFixed;
                        (sol.beta, sol.d, sol.iters, sol.kkt_inf, converged)
                    })
                })
            }
            SolverKind::Cd => cd_solve(problem, &spec, Some(&beta_prev), &opts.cd).map(|sol| {
                let converged = sol.converged_by == CdStop::DeltaConverged;
                (sol.beta, sol.d, sol.sweeps, sol.kkt_inf, converged)
            }),
        };
        let (beta, d, iters, kkt_inf, converged) = match solved {
            Ok(v) => v,
            Err(error) => {
                result.failure = Some(PathFailure {
                    index: t,
                    lambda,
                    error,
                });
                result.terminated_early = true;
                break;
            }
        };

        let size = beta.iter().filter(|&&b| b != 0.0).count();
        result.lambdas.push(lambda);
        result.iters.push(iters);
        result.kkt_inf.push(kkt_inf);
        result.support_size.push(size);
        result.rss.push(rss_from_dual(y_sq, problem.y_tilde(), &beta, &d));
        result.converged.push(converged);
        result.betas.push(beta.clone());

        if size > stop_above {
            result.terminated_early = true;
            break;
        }
        beta_prev = beta;
        d_prev = d;
    }

    Ok(result)
}

/// Voting selection: the support size hit most often along the path wins
/// (ties to the smaller size), and among its points the smallest lambda is
/// returned.
pub fn select_vsc(path: &PathResult) -> Result<Selected> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let cap = path.support_cap;
    let mut counts = vec![0usize; cap + 1];
    for &size in &path.support_size {
        if size >= 1 && size <= cap {
            counts[size] += 1;
        }
    }
    let mut best_size = 0;
    let mut best_count = 0;
    for (size, &count) in counts.iter().enumerate().skip(1) {
        if count > best_count {
            best_count = count;
            best_size = size;
        }
    }
    if best_count == 0 {
        return Err(Error::NoNonzeroSolution);
    }
    // Lambdas decrease along the path, so the last matching index attains
    // the minimum lambda.
    let index = (0..path.len())
        .rev()
        .find(|&t| path.support_size[t] == best_size)
        .expect("a counted size must appear");
    Ok(Selected {
        index,
        lambda: path.lambdas[index],
        beta: path.betas[index].clone(),
        support_size: best_size,
    })
}

/// High-dimensional BIC:
/// `log(rss/n) + ||beta||_0 * log(log n) * log(p) / n`, minimized over the
/// path; ties go to the larger lambda.
pub fn select_hbic(path: &PathResult, problem: &Problem) -> Result<Selected> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let n = problem.n() as f64;
    let p = problem.p() as f64;
    let penalty_rate = n.ln().ln() * p.ln() / n;
    let mut best_index = 0;
    let mut best_score = f64::INFINITY;
    for t in 0..path.len() {
        let score = (path.rss[t] / n).ln() + path.support_size[t] as f64 * penalty_rate;
        if score < best_score {
            best_score = score;
            best_index = t;
        }
    }
    Ok(Selected {
        index: best_index,
        lambda: path.lambdas[best_index],
        beta: path.betas[best_index].clone(),
        support_size: path.support_size[best_index],
    })
}
