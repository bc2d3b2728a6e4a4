//! Implementations of the `gen`, `fit`, `path`, and `bench` subcommands.

use std::path::Path;
use std::time::Instant;

use ndarray::Array1;
use serde_json::json;

use ssnreg::bench::{run_benchmark, to_aggregate_csv, to_timing_csv};
use ssnreg::cd::{cd_solve, CdOptions, CdStop};
use ssnreg::kkt::Problem;
use ssnreg::path::{select_hbic, select_vsc, solve_path, PathOptions, Selected, SolverKind};
use ssnreg::penalty::{PenaltyFamily, PenaltySpec};
use ssnreg::simgen::{generate_dataset, SimConfig};
use ssnreg::ssn::{ssn_solve_cold, SsnOptions, SsnStop};

use crate::io::{
    ensure_dir, read_matrix_csv, read_vector_csv, write_json, write_matrix_csv, write_text,
    write_vector_csv, JsonlWriter, RunManifest,
};
use crate::{BenchArgs, CliError, FitArgs, GenArgs, PathArgs, SelectArg};

fn write_manifest(
    dir: &Path,
    command: &str,
    options: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command, options, seed);
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let config = SimConfig {
        n: args.n,
        p: args.p,
        r: args.r,
        sigma: args.sigma,
        sparsity: args.sparsity,
        seed: args.seed,
    };
    config.validate()?;
    let (x, beta, y) = generate_dataset(&config)?;
    ensure_dir(&args.out_dir)?;
    write_matrix_csv(&args.out_dir.join("X.csv"), &x)?;
    write_vector_csv(&args.out_dir.join("y.csv"), &y)?;
    write_vector_csv(&args.out_dir.join("beta_true.csv"), &beta)?;
    write_manifest(
        &args.out_dir,
        "gen",
        serde_json::to_value(config).unwrap_or_default(),
        Some(args.seed),
        started,
    )?;
    println!(
        "wrote {} ({} x {}, T = {})",
        args.out_dir.display(),
        args.n,
        args.p,
        args.sparsity
    );
    Ok(())
}

/// Loads X and y, optionally rescaling columns to unit length. Returns the
/// problem and the original column norms (empty when not normalizing).
fn load_problem(
    x_path: &Path,
    y_path: &Path,
    no_normalize: bool,
) -> Result<(Problem, Vec<f64>), CliError> {
    let mut x = read_matrix_csv(x_path)?;
    let y = read_vector_csv(y_path)?;
    if x.nrows() != y.len() {
        return Err(CliError::Validation(format!(
            "X has {} rows but y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    let scales = if no_normalize {
        Vec::new()
    } else {
        Problem::normalize_columns(&mut x)
    };
    let problem = Problem::new(x, y)?;
    Ok((problem, scales))
}

fn write_scales(dir: &Path, scales: &[f64]) -> Result<(), CliError> {
    if scales.is_empty() {
        return Ok(());
    }
    let v = Array1::from_vec(scales.to_vec());
    write_vector_csv(&dir.join("column_scales.csv"), &v)
}

fn spec_for(family: PenaltyFamily, lambda: f64, gamma: Option<f64>) -> Result<PenaltySpec, CliError> {
    let gamma = gamma.unwrap_or_else(|| family.default_gamma());
    Ok(PenaltySpec::new(family, lambda, gamma)?)
}

struct FitOutcome {
    beta: Array1<f64>,
    d: Array1<f64>,
    iters: usize,
    stopped: &'static str,
    kkt_inf: f64,
    ridge_lifted: bool,
    grid_points: usize,
}

fn solve_at(
    problem: &Problem,
    spec: &PenaltySpec,
    solver: SolverKind,
    warm: Option<(&Array1<f64>, &Array1<f64>)>,
    args: &FitArgs,
) -> Result<FitOutcome, CliError> {
    match solver {
        SolverKind::Ssn => {
            let sol = match warm {
                Some((beta, d)) => {
                    let init = ssnreg::kkt::PrimalDualState::new(beta.clone(), d.clone(), spec)?;
                    let opts = SsnOptions {
                        max_iter: args.j.max(1),
                        ..SsnOptions::default()
                    };
                    ssnreg::ssn::ssn_solve(problem, spec, init, &opts)?
                }
                None => {
                    let opts = SsnOptions {
                        cold_max_iter: args.max_iter,
                        ..SsnOptions::default()
                    };
                    ssn_solve_cold(problem, spec, &opts)?
                }
            };
            let stopped = match sol.converged_by {
                SsnStop::ActiveSetFixed => "active_set_fixed",
                SsnStop::IterCap => "iter_cap",
            };
            Ok(FitOutcome {
                beta: sol.beta,
                d: sol.d,
                iters: sol.iters,
                stopped,
                kkt_inf: sol.kkt_inf,
                ridge_lifted: sol.ridge_lifted,
                grid_points: 1,
            })
        }
        SolverKind::Cd => {
            let opts = CdOptions {
                max_sweeps: args.max_sweeps,
                delta: args.delta,
            };
            let sol = cd_solve(problem, spec, warm.map(|(b, _)| b), &opts)?;
            let stopped = match sol.converged_by {
                CdStop::DeltaConverged => "delta_converged",
                CdStop::SweepCap => "sweep_cap",
            };
            Ok(FitOutcome {
                beta: sol.beta,
                d: sol.d,
                iters: sol.sweeps,
                stopped,
                kkt_inf: sol.kkt_inf,
                ridge_lifted: false,
                grid_points: 1,
            })
        }
    }
}

/// Warm-starts down the standard continuation grid and stops at the
/// requested lambda, mirroring the path layer's arithmetic exactly so a
/// fit at a path-selected lambda reproduces the stored solution bit for
/// bit.
fn warm_fit(
    problem: &Problem,
    family: PenaltyFamily,
    gamma: f64,
    lambda: f64,
    solver: SolverKind,
    args: &FitArgs,
) -> Result<FitOutcome, CliError> {
    let lambda_max = problem.lambda_max();
    if lambda >= lambda_max {
        // The zero solution is exact here; a direct solve is trivial.
        let spec = PenaltySpec::new(family, lambda, gamma)?;
        return solve_at(problem, &spec, solver, None, args);
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Validation(format!(
            "alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let cap = ssnreg::path::support_cap(problem.n(), problem.p());
    let rho = (args.alpha.ln() / args.m.max(1) as f64).exp();
    let mut beta_prev = Array1::zeros(problem.p());
    let mut d_prev = problem.y_tilde().clone();
    let mut grid_points = 0usize;
    let mut t = 0i32;
    loop {
        let lambda_t = lambda_max * rho.powi(t);
        let (target, last) = if t as usize > args.m || lambda_t <= lambda * (1.0 + 1e-12) {
            if (lambda_t - lambda).abs() <= 1e-9 * lambda && t as usize <= args.m {
                (lambda_t, true)
            } else {
                (lambda, true)
            }
        } else {
            (lambda_t, false)
        };
        let spec = PenaltySpec::new(family, target, gamma)?;
        let outcome = solve_at(problem, &spec, solver, Some((&beta_prev, &d_prev)), args)?;
        grid_points += 1;
        if last {
            return Ok(FitOutcome {
                grid_points,
                ..outcome
            });
        }
        let support = outcome.beta.iter().filter(|&&b| b != 0.0).count();
        if support > cap {
            return Err(CliError::Solver(format!(
                "support grew to {support} (cap {cap}) before reaching lambda = {lambda}; \
                 the requested lambda is below the identifiability horizon"
            )));
        }
        beta_prev = outcome.beta;
        d_prev = outcome.d;
        t += 1;
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (problem, scales) = load_problem(&args.x, &args.y, args.no_normalize)?;
    let family: PenaltyFamily = args.penalty.into();
    let spec = spec_for(family, args.lambda, args.gamma)?;
    ensure_dir(&args.out_dir)?;

    let outcome = if args.cold {
        solve_at(&problem, &spec, args.solver.into(), None, args)?
    } else {
        warm_fit(
            &problem,
            family,
            spec.gamma(),
            spec.lambda(),
            args.solver.into(),
            args,
        )?
    };
    let FitOutcome {
        beta,
        d,
        iters,
        stopped,
        kkt_inf,
        ridge_lifted: lifted,
        grid_points,
    } = outcome;

    let support: Vec<usize> = beta
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(i, _)| i)
        .collect();
    write_vector_csv(&args.out_dir.join("beta.csv"), &beta)?;
    write_vector_csv(&args.out_dir.join("d.csv"), &d)?;
    write_scales(&args.out_dir, &scales)?;
    write_json(
        &args.out_dir.join("report.json"),
        &json!({
            "solver": args.solver.to_string(),
            "penalty": spec.family().to_string(),
            "lambda": spec.lambda(),
            "gamma": spec.gamma(),
            "mode": if args.cold { "cold" } else { "continuation" },
            "grid_points": grid_points,
            "iters": iters,
            "converged_by": stopped,
            "kkt_inf": kkt_inf,
            "ridge_lifted": lifted,
            "support_size": support.len(),
            "support": support,
        }),
    )?;
    let options = json!({
        "x": args.x.display().to_string(),
        "y": args.y.display().to_string(),
        "penalty": spec.family().to_string(),
        "lambda": spec.lambda(),
        "gamma": spec.gamma(),
        "solver": args.solver.to_string(),
        "cold": args.cold,
        "max_iter": args.max_iter,
        "alpha": args.alpha,
        "M": args.m,
        "J": args.j,
        "max_sweeps": args.max_sweeps,
        "delta": args.delta,
        "no_normalize": args.no_normalize,
    });
    write_manifest(&args.out_dir, "fit", options, None, started)?;
    println!(
        "fit: {} nonzero of {}, kkt_inf = {kkt_inf:.3e}, stopped by {stopped}",
        support.len(),
        problem.p()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct PathRecord {
    t: usize,
    lambda: f64,
    support_size: usize,
    kkt_inf: f64,
    iters: usize,
    converged: bool,
    rss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<f64>>,
}

pub fn cmd_path(args: &PathArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (problem, scales) = load_problem(&args.x, &args.y, args.no_normalize)?;
    let family: PenaltyFamily = args.penalty.into();
    let gamma = args.gamma.unwrap_or_else(|| family.default_gamma());
    let opts = PathOptions {
        alpha: args.alpha,
        m: args.m,
        j: args.j,
        cd: CdOptions {
            max_sweeps: args.max_sweeps,
            delta: args.delta,
        },
        ..PathOptions::default()
    };
    let path = solve_path(&problem, family, gamma, args.solver.into(), &opts)?;
    ensure_dir(&args.out_dir)?;
    write_scales(&args.out_dir, &scales)?;

    let mut jsonl = JsonlWriter::create(&args.out_dir.join("path.jsonl"))?;
    for t in 0..path.len() {
        jsonl.write(&PathRecord {
            t,
            lambda: path.lambdas[t],
            support_size: path.support_size[t],
            kkt_inf: path.kkt_inf[t],
            iters: path.iters[t],
            converged: path.converged[t],
            rss: path.rss[t],
            beta: args.emit_beta.then(|| path.betas[t].to_vec()),
        })?;
    }

    let selected: Option<Selected> = match args.select {
        SelectArg::None => None,
        SelectArg::Vsc => Some(select_vsc(&path)?),
        SelectArg::Hbic => Some(select_hbic(&path, &problem)?),
    };
    if let Some(sel) = &selected {
        write_vector_csv(&args.out_dir.join("selected.csv"), &sel.beta)?;
        let support: Vec<usize> = sel
            .beta
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(i, _)| i)
            .collect();
        write_json(
            &args.out_dir.join("selection.json"),
            &json!({
                "criterion": args.select.to_string(),
                "index": sel.index,
                "lambda": sel.lambda,
                "support_size": sel.support_size,
                "support": support,
            }),
        )?;
    }

    let options = json!({
        "x": args.x.display().to_string(),
        "y": args.y.display().to_string(),
        "penalty": family.to_string(),
        "gamma": gamma,
        "alpha": args.alpha,
        "M": args.m,
        "J": args.j,
        "solver": args.solver.to_string(),
        "select": args.select.to_string(),
        "delta": args.delta,
        "max_sweeps": args.max_sweeps,
        "emit_beta": args.emit_beta,
        "no_normalize": args.no_normalize,
    });
    write_manifest(&args.out_dir, "path", options, None, started)?;

    let tail = if path.terminated_early {
        ", terminated early"
    } else {
        ""
    };
    match &selected {
        Some(sel) => println!(
            "path: {} points{tail}; selected lambda = {:.6e} with {} nonzero",
            path.len(),
            sel.lambda,
            sel.support_size
        ),
        None => println!("path: {} points{tail}", path.len()),
    }
    if let Some(failure) = &path.failure {
        eprintln!(
            "warning: solver failed at lambda index {} ({:.6e}): {}",
            failure.index, failure.lambda, failure.error
        );
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if let Ok(threads) = std::env::var("SSNREG_THREADS") {
        let threads: usize = threads.parse().map_err(|_| {
            CliError::Validation(format!("SSNREG_THREADS must be a positive integer, got '{threads}'"))
        })?;
        if threads == 0 {
            return Err(CliError::Validation(
                "SSNREG_THREADS must be a positive integer".into(),
            ));
        }
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let content = std::fs::read_to_string(&args.grid_file)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.grid_file.display())))?;
    let cells = crate::grid::parse_grid(&content)?;
    let result = run_benchmark(&cells, args.replications, args.seed);

    ensure_dir(&args.out)?;
    let mut jsonl = JsonlWriter::create(&args.out.join("results.jsonl"))?;
    for rec in &result.records {
        jsonl.write(&json!({"kind": "replication", "record": rec}))?;
    }
    for agg in &result.aggregates {
        jsonl.write(&json!({"kind": "aggregate", "record": agg}))?;
    }
    write_text(
        &args.out.join("aggregates.csv"),
        &to_aggregate_csv(&result.aggregates),
    )?;
    write_text(
        &args.out.join("timings.csv"),
        &to_timing_csv(&result.aggregates),
    )?;
    let options = json!({
        "grid_file": args.grid_file.display().to_string(),
        "replications": args.replications,
        "seed": args.seed,
        "cells": cells.len(),
    });
    write_manifest(&args.out, "bench", options, Some(args.seed), started)?;

    let failures: usize = result.aggregates.iter().map(|a| a.failures).sum();
    println!(
        "bench: {} cells x {} replications, {failures} failures; results in {}",
        cells.len(),
        args.replications,
        args.out.display()
    );
    Ok(())
}
