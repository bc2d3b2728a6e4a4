//! Problem container, primal-dual state, active-set partitions, and the
//! KKT residual whose roots are the stationary points.
//!
//! The Gram matrix `G = X'X` is never materialized: the dual update and the
//! residual use two `O(n*p)` matrix-vector products, and the solvers form
//! only the small active blocks `X_A' X_A`.

use ndarray::{Array1, Array2, ShapeBuilder};

use crate::error::{Error, Result};
use crate::penalty::{penalty_value, threshold, PenaltyFamily, PenaltySpec};

const COLUMN_NORM_TOL: f64 = 1e-10;

/// A column-normalized regression problem with the cached gradient anchor
/// `y_tilde = X'y`.
///
/// The design is stored column-major: every inner loop of the solvers is a
/// walk over one column, and contiguous columns keep those loops on the
/// fast vectorized kernels.
#[derive(Debug, Clone)]
pub struct Problem {
    x: Array2<f64>,
    y: Array1<f64>,
    y_tilde: Array1<f64>,
}

impl Problem {
    /// Builds a problem, checking that every column of `x` has unit length.
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        // Re-layout into column-major storage.
        let mut xf = Array2::zeros((x.nrows(), x.ncols()).f());
        xf.assign(&x);
        let x = xf;
        for (j, col) in x.columns().into_iter().enumerate() {
            let norm = col.dot(&col).sqrt();
            if (norm - 1.0).abs() > COLUMN_NORM_TOL {
                return Err(Error::NotNormalized { col: j, norm });
            }
        }
        let mut y_tilde = Array1::zeros(x.ncols());
        for (j, col) in x.columns().into_iter().enumerate() {
            y_tilde[j] = col.dot(&y);
        }
        Ok(Self { x, y, y_tilde })
    }

    /// `X v`, skipping zero coefficients (cost `O(n * ||v||_0)`).
    pub fn matvec(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        if v.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "matvec input has {} entries, problem has p = {}",
                v.len(),
                self.p()
            )));
        }
        let mut out = Array1::zeros(self.n());
        for (j, col) in self.x.columns().into_iter().enumerate() {
            let vj = v[j];
            if vj != 0.0 {
                out.scaled_add(vj, &col);
            }
        }
        Ok(out)
    }

    /// `X'u` as one contiguous dot per column.
    pub fn t_matvec(&self, u: &Array1<f64>) -> Result<Array1<f64>> {
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "t_matvec input has {} entries, problem has n = {}",
                u.len(),
                self.n()
            )));
        }
        let mut out = Array1::zeros(self.p());
        for (j, col) in self.x.columns().into_iter().enumerate() {
            out[j] = col.dot(u);
        }
        Ok(out)
    }

    /// Rescales every column of `x` to unit length in place and returns the
    /// original norms. A zero column is left untouched and reported with
    /// scale 0.
    pub fn normalize_columns(x: &mut Array2<f64>) -> Vec<f64> {
        let mut scales = Vec::with_capacity(x.ncols());
        for mut col in x.columns_mut() {
            let norm = col.dot(&col).sqrt();
            if norm > 0.0 {
                col.mapv_inplace(|v| v / norm);
            }
            scales.push(norm);
        }
        scales
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn y_tilde(&self) -> &Array1<f64> {
        &self.y_tilde
    }

    /// `||X'y||_inf`, the smallest lambda with an all-zero solution.
    pub fn lambda_max(&self) -> f64 {
        self.y_tilde.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Index sets of the linear regimes of the thresholding operator at
/// `w = beta + d`, ordered as the solvers consume them.
///
/// `a1`/`a2` (and `a3` for SCAD) are ascending; `b` is the inactive set.
/// For MCP `a3` is always empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivePartition {
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    pub a3: Vec<usize>,
    pub b: Vec<usize>,
}

impl ActivePartition {
    /// Active indices in block order `[a1, a2, a3]`.
    pub fn active(&self) -> Vec<usize> {
        let mut a = Vec::with_capacity(self.active_len());
        a.extend_from_slice(&self.a1);
        a.extend_from_slice(&self.a2);
        a.extend_from_slice(&self.a3);
        a
    }

    pub fn active_len(&self) -> usize {
        self.a1.len() + self.a2.len() + self.a3.len()
    }
}

/// Partition of `{0..p}` by `|w_i|` under the MCP regime boundaries:
/// `b: |w| <= lambda`, `a1: lambda < |w| < gamma*lambda`,
/// `a2: |w| >= gamma*lambda`.
pub fn partition_mcp(w: &Array1<f64>, spec: &PenaltySpec) -> Result<ActivePartition> {
    if spec.family() != PenaltyFamily::Mcp {
        return Err(Error::FamilyMismatch {
            expected: PenaltyFamily::Mcp,
            got: spec.family(),
        });
    }
    let (lambda, gamma) = (spec.lambda(), spec.gamma());
    let mut part = ActivePartition::default();
    for (i, &wi) in w.iter().enumerate() {
        let a = wi.abs();
        if a <= lambda {
            part.b.push(i);
        } else if a < gamma * lambda {
            part.a1.push(i);
        } else {
            part.a2.push(i);
        }
    }
    Ok(part)
}

/// SCAD regime boundaries: `b: |w| <= lambda`, `a1: lambda < |w| < 2*lambda`,
/// `a2: 2*lambda <= |w| < gamma*lambda`, `a3: |w| >= gamma*lambda`.
pub fn partition_scad(w: &Array1<f64>, spec: &PenaltySpec) -> Result<ActivePartition> {
    if spec.family() != PenaltyFamily::Scad {
        return Err(Error::FamilyMismatch {
            expected: PenaltyFamily::Scad,
            got: spec.family(),
        });
    }
    let (lambda, gamma) = (spec.lambda(), spec.gamma());
    let mut part = ActivePartition::default();
    for (i, &wi) in w.iter().enumerate() {
        let a = wi.abs();
        if a <= lambda {
            part.b.push(i);
        } else if a < 2.0 * lambda {
            part.a1.push(i);
        } else if a < gamma * lambda {
            part.a2.push(i);
        } else {
            part.a3.push(i);
        }
    }
    Ok(part)
}

/// Dispatches on the spec's family.
pub fn partition(w: &Array1<f64>, spec: &PenaltySpec) -> ActivePartition {
    match spec.family() {
        PenaltyFamily::Mcp => partition_mcp(w, spec).expect("family checked"),
        PenaltyFamily::Scad => partition_scad(w, spec).expect("family checked"),
    }
}

/// The iterate pair `(beta, d)` together with the partition computed from
/// `beta + d` and an iteration counter.
#[derive(Debug, Clone)]
pub struct PrimalDualState {
    pub beta: Array1<f64>,
    pub d: Array1<f64>,
    pub partition: ActivePartition,
    pub iter: usize,
}

impl PrimalDualState {
    pub fn new(beta: Array1<f64>, d: Array1<f64>, spec: &PenaltySpec) -> Result<Self> {
        if beta.len() != d.len() {
            return Err(Error::DimensionMismatch(format!(
                "beta has {} entries but d has {}",
                beta.len(),
                d.len()
            )));
        }
        let w = &beta + &d;
        let partition = partition(&w, spec);
        Ok(Self {
            beta,
            d,
            partition,
            iter: 0,
        })
    }

    /// The zero-solution state `(0, y_tilde)`, exact for
    /// `lambda >= ||X'y||_inf`.
    pub fn zero(problem: &Problem, spec: &PenaltySpec) -> Self {
        Self::new(Array1::zeros(problem.p()), problem.y_tilde().clone(), spec)
            .expect("lengths match by construction")
    }
}

/// `d = y_tilde - X'(X beta)`, computed with two matrix-vector products.
pub fn dual_from_beta(problem: &Problem, beta: &Array1<f64>) -> Result<Array1<f64>> {
    let xb = problem.matvec(beta)?;
    Ok(problem.y_tilde() - &problem.t_matvec(&xb)?)
}

/// The stacked KKT residual
/// `F = [beta - T(beta + d); G beta + d - y_tilde]` of length `2p`.
pub fn kkt_residual(
    problem: &Problem,
    state: &PrimalDualState,
    spec: &PenaltySpec,
) -> Result<Array1<f64>> {
    let p = problem.p();
    if state.beta.len() != p || state.d.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "state has {} primal / {} dual entries, problem has p = {}",
            state.beta.len(),
            state.d.len(),
            p
        )));
    }
    let w = &state.beta + &state.d;
    let xb = problem.matvec(&state.beta)?;
    let gb = problem.t_matvec(&xb)?;
    let mut f = Array1::zeros(2 * p);
    for i in 0..p {
        f[i] = state.beta[i] - threshold(w[i], spec);
        f[p + i] = gb[i] + state.d[i] - problem.y_tilde()[i];
    }
    Ok(f)
}

/// `||F||_inf` of [`kkt_residual`].
pub fn kkt_max_violation(
    problem: &Problem,
    state: &PrimalDualState,
    spec: &PenaltySpec,
) -> Result<f64> {
    let f = kkt_residual(problem, state, spec)?;
    Ok(f.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// The penalized least-squares objective
/// `0.5*||X beta - y||^2 + sum_i p(beta_i)`.
pub fn objective(problem: &Problem, beta: &Array1<f64>, spec: &PenaltySpec) -> f64 {
    let r = &problem.matvec(beta).expect("dimension checked by caller") - problem.y();
    0.5 * r.dot(&r)
        + beta
            .iter()
            .map(|&bi| penalty_value(bi, spec))
            .sum::<f64>()
}
