//! Benchmark harness: runs solver paths over a grid of data configurations
//! and aggregates the per-replication metrics.
//!
//! Replication seeds are derived deterministically from the master seed and
//! the data-defining fields only, so every solver/penalty cell sharing a
//! data configuration sees identical datasets replication by replication.
//! Replications run in parallel and are merged by index, which keeps all
//! non-timing outputs bit-reproducible.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::Problem;
use crate::path::{select_hbic, select_vsc, solve_path, PathOptions, Selected, SolverKind};
use crate::penalty::PenaltyFamily;
use crate::simgen::{evaluate_metrics, generate_dataset, Metrics, SimConfig};

/// Tuning-parameter selection rule applied to each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Vsc,
    Hbic,
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Vsc => write!(f, "vsc"),
            Selector::Hbic => write!(f, "hbic"),
        }
    }
}

/// One benchmark cell: a data configuration crossed with a penalty, a
/// solver, and a selector. The config's own seed is ignored; replication
/// seeds come from the master seed.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub name: String,
    pub config: SimConfig,
    pub family: PenaltyFamily,
    pub gamma: f64,
    pub solver: SolverKind,
    pub selector: Selector,
    pub path: PathOptions,
}

/// One replication of one cell.
#[derive(Debug, Clone, Serialize)]
pub struct RepRecord {
    pub cell: String,
    pub family: PenaltyFamily,
    pub solver: SolverKind,
    pub rep: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub selected_lambda: f64,
    pub selected_support: Vec<usize>,
    pub path_points: usize,
    pub terminated_early: bool,
    /// Largest KKT violation among path points whose solver reported
    /// convergence.
    pub max_kkt_converged: f64,
    /// Fraction of the second half of the path solved in a single iteration
    /// (meaningful for SSN).
    pub one_iter_frac: f64,
    pub error: Option<String>,
}

/// Per-cell averages over the successful replications.
#[derive(Debug, Clone, Serialize)]
pub struct CellAggregate {
    pub cell: String,
    pub family: PenaltyFamily,
    pub solver: SolverKind,
    pub n: usize,
    pub p: usize,
    pub r: f64,
    pub sigma: f64,
    pub sparsity: usize,
    pub gamma: f64,
    pub reps: usize,
    pub failures: usize,
    pub ms: f64,
    pub cm: f64,
    pub ae: f64,
    pub re: f64,
    pub pe: f64,
    pub mean_time_secs: f64,
    pub median_time_secs: f64,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub records: Vec<RepRecord>,
    pub aggregates: Vec<CellAggregate>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Replication seed from the master seed and the data-defining fields only
/// (never the solver or penalty, so paired cells share data).
pub fn replication_seed(master: u64, config: &SimConfig, rep: usize) -> u64 {
    let mut h = splitmix64(master);
    for v in [
        config.n as u64,
        config.p as u64,
        config.r.to_bits(),
        config.sigma.to_bits(),
        config.sparsity as u64,
        rep as u64,
    ] {
        h = splitmix64(h ^ v);
    }
    h
}

fn run_replication(cell: &BenchCell, rep: usize, master_seed: u64) -> RepRecord {
    let seed = replication_seed(master_seed, &cell.config, rep);
    let config = SimConfig {
        seed,
        ..cell.config
    };
    let mut record = RepRecord {
        cell: cell.name.clone(),
        family: cell.family,
        solver: cell.solver,
        rep,
        seed,
        metrics: Metrics {
            ms: 0,
            cm: false,
            ae: 0.0,
            re: 0.0,
            re_is_absolute: false,
            pe: 0.0,
            time_secs: 0.0,
        },
        selected_lambda: 0.0,
        selected_support: Vec::new(),
        path_points: 0,
        terminated_early: false,
        max_kkt_converged: 0.0,
        one_iter_frac: 0.0,
        error: None,
    };

    let run = || -> Result<(Metrics, Selected, crate::path::PathResult)> {
        let (x, beta_dagger, y) = generate_dataset(&config)?;
        let problem = Problem::new(x, y)?;
        let start = Instant::now();
        if problem.lambda_max() <= 0.0 {
            // Degenerate response: the zero solution is exact everywhere.
            let beta = ndarray::Array1::zeros(problem.p());
            let elapsed = start.elapsed().as_secs_f64();
            let metrics =
                evaluate_metrics(&beta, &beta_dagger, problem.x(), problem.y(), elapsed)?;
            let selected = Selected {
                index: 0,
                lambda: 0.0,
                beta,
                support_size: 0,
            };
            return Ok((
                metrics,
                selected,
                crate::path::PathResult {
                    lambdas: Vec::new(),
                    betas: Vec::new(),
                    iters: Vec::new(),
                    kkt_inf: Vec::new(),
                    support_size: Vec::new(),
                    rss: Vec::new(),
                    converged: Vec::new(),
                    support_cap: 0,
                    terminated_early: false,
                    failure: None,
                },
            ));
        }
        let path = solve_path(&problem, cell.family, cell.gamma, cell.solver, &cell.path)?;
        let selected = match cell.selector {
            Selector::Vsc => select_vsc(&path),
            Selector::Hbic => select_hbic(&path, &problem),
        };
        // An all-zero path has nothing to vote on; report the zero solution.
        let selected = match selected {
            Ok(sel) => sel,
            Err(Error::NoNonzeroSolution) => Selected {
                index: 0,
                lambda: path.lambdas.first().copied().unwrap_or(0.0),
                beta: ndarray::Array1::zeros(problem.p()),
                support_size: 0,
            },
            Err(e) => return Err(e),
        };
        let elapsed = start.elapsed().as_secs_f64();
        let metrics = evaluate_metrics(
            &selected.beta,
            &beta_dagger,
            problem.x(),
            problem.y(),
            elapsed,
        )?;
        Ok((metrics, selected, path))
    };

    match run() {
        Ok((metrics, selected, path)) => {
            record.metrics = metrics;
            record.selected_lambda = selected.lambda;
            record.selected_support = selected
                .beta
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0.0)
                .map(|(i, _)| i)
                .collect();
            record.path_points = path.len();
            record.terminated_early = path.terminated_early;
            record.max_kkt_converged = path
                .kkt_inf
                .iter()
                .zip(path.converged.iter())
                .filter(|(_, &c)| c)
                .fold(0.0f64, |m, (&v, _)| m.max(v));
            let late = path.len() / 2..path.len();
            if !late.is_empty() {
                let total = late.len();
                let ones = late.filter(|&t| path.iters[t] == 1).count();
                record.one_iter_frac = ones as f64 / total as f64;
            }
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

fn aggregate_cell(cell: &BenchCell, records: &[&RepRecord]) -> CellAggregate {
    let ok: Vec<&&RepRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let k = ok.len().max(1) as f64;
    let mut times: Vec<f64> = ok.iter().map(|r| r.metrics.time_secs).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if times.is_empty() {
        0.0
    } else if times.len() % 2 == 1 {
        times[times.len() / 2]
    } else {
        0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
    };
    CellAggregate {
        cell: cell.name.clone(),
        family: cell.family,
        solver: cell.solver,
        n: cell.config.n,
        p: cell.config.p,
        r: cell.config.r,
        sigma: cell.config.sigma,
        sparsity: cell.config.sparsity,
        gamma: cell.gamma,
        reps: records.len(),
        failures: records.len() - ok.len(),
        ms: ok.iter().map(|r| r.metrics.ms as f64).sum::<f64>() / k,
        cm: ok.iter().filter(|r| r.metrics.cm).count() as f64 / k,
        ae: ok.iter().map(|r| r.metrics.ae).sum::<f64>() / k,
        re: ok.iter().map(|r| r.metrics.re).sum::<f64>() / k,
        pe: ok.iter().map(|r| r.metrics.pe).sum::<f64>() / k,
        mean_time_secs: ok.iter().map(|r| r.metrics.time_secs).sum::<f64>() / k,
        median_time_secs: median,
    }
}

/// Runs every cell for `reps` replications and aggregates per cell.
pub fn run_benchmark(cells: &[BenchCell], reps: usize, master_seed: u64) -> BenchResult {
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let mut indexed: Vec<((usize, usize), RepRecord)> = jobs
        .par_iter()
        .map(|&(c, r)| ((c, r), run_replication(&cells[c], r, master_seed)))
        .collect();
    indexed.sort_by_key(|(key, _)| *key);
    let records: Vec<RepRecord> = indexed.into_iter().map(|(_, rec)| rec).collect();

    let aggregates = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let cell_records: Vec<&RepRecord> =
                records[c * reps..(c + 1) * reps].iter().collect();
            aggregate_cell(cell, &cell_records)
        })
        .collect();

    BenchResult {
        records,
        aggregates,
    }
}

/// Metric aggregates as CSV. Timing columns live in [`to_timing_csv`] so
/// this table is bit-reproducible for a fixed master seed.
pub fn to_aggregate_csv(aggregates: &[CellAggregate]) -> String {
    let mut out =
        String::from("cell,family,solver,n,p,r,sigma,T,gamma,reps,failures,ms,cm,ae,re,pe\n");
    for a in aggregates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            a.cell,
            a.family,
            a.solver,
            a.n,
            a.p,
            a.r,
            a.sigma,
            a.sparsity,
            a.gamma,
            a.reps,
            a.failures,
            a.ms,
            a.cm,
            a.ae,
            a.re,
            a.pe
        ));
    }
    out
}

/// Wall-clock aggregates as CSV (hardware-dependent, reported separately).
pub fn to_timing_csv(aggregates: &[CellAggregate]) -> String {
    let mut out = String::from("cell,family,solver,mean_time_secs,median_time_secs\n");
    for a in aggregates {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            a.cell, a.family, a.solver, a.mean_time_secs, a.median_time_secs
        ));
    }
    out
}
