//! Shared helpers for the integration suites: independent oracles and
//! instance generators. Nothing here calls into the solver paths it checks.

use ndarray::{Array1, Array2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use ssnreg::penalty::{penalty_value, PenaltyFamily, PenaltySpec};

/// Random matrix with exactly orthonormal columns (modified Gram-Schmidt).
pub fn orthonormal_design(n: usize, p: usize, seed: u64) -> Array2<f64> {
    assert!(p <= n);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
    for j in 0..p {
        for k in 0..j {
            let proj = x.column(k).dot(&x.column(j));
            let prev = x.column(k).to_owned();
            x.column_mut(j).scaled_add(-proj, &prev);
        }
        let norm = x.column(j).dot(&x.column(j)).sqrt();
        x.column_mut(j).mapv_inplace(|v| v / norm);
    }
    x
}

/// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi.
pub fn min_eigenvalue_sym(a: &Array2<f64>) -> f64 {
    let mut a = a.clone();
    let m = a.nrows();
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[(p, q)].abs() < 1e-15 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min)
}

/// One affine regime of the penalty derivative on a sign-definite interval:
/// on it `p'(t) = diag_shift * t + offset`, valid for `t` in `[lo, hi]`.
struct Regime {
    lo: f64,
    hi: f64,
    diag_shift: f64,
    offset: f64,
}

fn regimes(spec: &PenaltySpec) -> Vec<Regime> {
    let (lambda, gamma) = (spec.lambda(), spec.gamma());
    match spec.family() {
        PenaltyFamily::Mcp => vec![
            // p'(t) = lambda*sign(t) - t/gamma on |t| <= gamma*lambda, else 0.
            Regime {
                lo: 0.0,
                hi: gamma * lambda,
                diag_shift: -1.0 / gamma,
                offset: lambda,
            },
            Regime {
                lo: gamma * lambda,
                hi: f64::INFINITY,
                diag_shift: 0.0,
                offset: 0.0,
            },
            Regime {
                lo: -gamma * lambda,
                hi: 0.0,
                diag_shift: -1.0 / gamma,
                offset: -lambda,
            },
            Regime {
                lo: f64::NEG_INFINITY,
                hi: -gamma * lambda,
                diag_shift: 0.0,
                offset: 0.0,
            },
        ],
        PenaltyFamily::Scad => vec![
            Regime {
                lo: 0.0,
                hi: lambda,
                diag_shift: 0.0,
                offset: lambda,
            },
            Regime {
                lo: lambda,
                hi: gamma * lambda,
                diag_shift: -1.0 / (gamma - 1.0),
                offset: gamma * lambda / (gamma - 1.0),
            },
            Regime {
                lo: gamma * lambda,
                hi: f64::INFINITY,
                diag_shift: 0.0,
                offset: 0.0,
            },
            Regime {
                lo: -lambda,
                hi: 0.0,
                diag_shift: 0.0,
                offset: -lambda,
            },
            Regime {
                lo: -gamma * lambda,
                hi: -lambda,
                diag_shift: -1.0 / (gamma - 1.0),
                offset: -gamma * lambda / (gamma - 1.0),
            },
            Regime {
                lo: f64::NEG_INFINITY,
                hi: -gamma * lambda,
                diag_shift: 0.0,
                offset: 0.0,
            },
        ],
    }
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let mut pivot = col;
        for row in (col + 1)..m {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..m {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            let (pivot_row, this_row) = (&upper[col], &mut lower[0]);
            for (av, pv) in this_row[col..m].iter_mut().zip(&pivot_row[col..m]) {
                *av -= f * pv;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut v = b[row];
        for k in (row + 1)..m {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    Some(x)
}

pub struct OracleSolution {
    pub beta: Array1<f64>,
    pub objective: f64,
    pub support: Vec<usize>,
}

/// Global minimizer of the penalized objective by exhaustive enumeration.
///
/// Every support is crossed with every sign/branch regime of the penalty
/// derivative; on a fixed regime the stationarity system is linear, so each
/// candidate is one small solve plus a membership check. Any minimizer with
/// nonzero entries is a stationary point of the C^1 objective and therefore
/// appears among the candidates; supports where it has exact zeros are
/// covered by the smaller-support iterations.
pub fn global_minimizer(x: &Array2<f64>, y: &Array1<f64>, spec: &PenaltySpec) -> OracleSolution {
    let p = x.ncols();
    assert!(p <= 12, "enumeration oracle is for tiny instances");
    let g = x.t().dot(x);
    let ytil = x.t().dot(y);
    let ysq = y.dot(y);
    let regs = regimes(spec);
    let reg_tol = 1e-9;

    let objective_of = |idx: &[usize], beta_s: &[f64]| -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        let mut pen = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            lin += ytil[i] * beta_s[a];
            pen += penalty_value(beta_s[a], spec);
            for (b, &j) in idx.iter().enumerate() {
                quad += beta_s[a] * g[(i, j)] * beta_s[b];
            }
        }
        0.5 * quad - lin + 0.5 * ysq + pen
    };

    let mut best = OracleSolution {
        beta: Array1::zeros(p),
        objective: 0.5 * ysq,
        support: Vec::new(),
    };

    for mask in 1u32..(1 << p) {
        let idx: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        let mut assignment = vec![0usize; m];
        loop {
            // Stationarity on this regime: (G_SS + diag(shift)) b = ytil_S - offset.
            let mut a_mat: Vec<Vec<f64>> = (0..m)
                .map(|r| (0..m).map(|c| g[(idx[r], idx[c])]).collect())
                .collect();
            let mut rhs: Vec<f64> = Vec::with_capacity(m);
            for r in 0..m {
                let reg = &regs[assignment[r]];
                a_mat[r][r] += reg.diag_shift;
                rhs.push(ytil[idx[r]] - reg.offset);
            }
            if let Some(beta_s) = solve_dense(&mut a_mat, &mut rhs) {
                let inside = beta_s.iter().enumerate().all(|(r, &b)| {
                    let reg = &regs[assignment[r]];
                    b >= reg.lo - reg_tol && b <= reg.hi + reg_tol && b.abs() > reg_tol
                });
                if inside {
                    let obj = objective_of(&idx, &beta_s);
                    if obj < best.objective {
                        let mut beta = Array1::zeros(p);
                        for (a, &i) in idx.iter().enumerate() {
                            beta[i] = beta_s[a];
                        }
                        best = OracleSolution {
                            beta,
                            objective: obj,
                            support: idx.clone(),
                        };
                    }
                }
            }
            // Next regime assignment (odometer).
            let mut carry = 0;
            loop {
                assignment[carry] += 1;
                if assignment[carry] < regs.len() {
                    break;
                }
                assignment[carry] = 0;
                carry += 1;
                if carry == m {
                    break;
                }
            }
            if carry == m {
                break;
            }
        }
    }
    best
}

#[allow(dead_code)]
pub fn support_of(beta: &Array1<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(i, _)| i)
        .collect()
}
