//! End-to-end tests of the `ssnreg` binary: file formats, exit codes, and
//! the gen -> path -> fit round trip.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssnreg"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn ssnreg");
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str], expect_code: i32) -> Output {
    let out = bin().args(args).output().expect("spawn ssnreg");
    assert_eq!(
        out.status.code(),
        Some(expect_code),
        "command {args:?}:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn gen_is_deterministic_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_ok(&[
            "gen", "--n", "30", "--p", "50", "--r", "0.3", "--sigma", "0.1", "--T", "4",
            "--seed", "9", "--out-dir", dir.path().to_str().unwrap(),
        ]);
    }
    for file in ["X.csv", "y.csv", "beta_true.csv"] {
        assert_eq!(
            read(&a.path().join(file)),
            read(&b.path().join(file)),
            "{file} differs between identical gen runs"
        );
    }
    assert!(a.path().join("manifest.json").exists());
}

#[test]
fn gen_zero_sparsity_writes_zero_signal() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "10", "--p", "6", "--T", "0", "--seed", "1", "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let truth = read(&dir.path().join("beta_true.csv"));
    assert!(truth.lines().all(|l| l.trim() == "0"));
}

#[test]
fn round_trip_gen_path_fit_is_bit_exact() {
    let data = tempfile::tempdir().unwrap();
    let path_out = tempfile::tempdir().unwrap();
    let fit_out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "200", "--p", "500", "--r", "0.1", "--sigma", "0.01", "--T", "10",
        "--seed", "5", "--out-dir", data.path().to_str().unwrap(),
    ]);
    let x = data.path().join("X.csv");
    let y = data.path().join("y.csv");
    run_ok(&[
        "path", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "--penalty", "scad",
        "--select", "vsc", "--out-dir", path_out.path().to_str().unwrap(),
    ]);
    let selection: serde_json::Value =
        serde_json::from_str(&read(&path_out.path().join("selection.json"))).unwrap();
    let lambda = selection["lambda"].as_f64().unwrap();
    run_ok(&[
        "fit", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "--penalty", "scad",
        "--lambda", &format!("{lambda}"), "--out-dir", fit_out.path().to_str().unwrap(),
    ]);
    assert_eq!(
        read(&fit_out.path().join("beta.csv")),
        read(&path_out.path().join("selected.csv")),
        "fit at the selected lambda must reproduce the stored path solution"
    );
    // The selected support must be the generating one on this easy data.
    let truth = read(&data.path().join("beta_true.csv"));
    let true_support: Vec<usize> = truth
        .lines()
        .enumerate()
        .filter(|(_, l)| l.trim() != "0")
        .map(|(i, _)| i)
        .collect();
    let got: Vec<usize> = selection["support"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(got, true_support);
}

#[test]
fn fit_trivial_lambda_returns_zero_solution() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "20", "--p", "10", "--T", "2", "--sigma", "0.1", "--seed", "3",
        "--out-dir", data.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "fit", "--x", data.path().join("X.csv").to_str().unwrap(), "--y",
        data.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--lambda", "1e9",
        "--out-dir", out.path().to_str().unwrap(),
    ]);
    let beta = read(&out.path().join("beta.csv"));
    assert!(beta.lines().all(|l| l.trim() == "0"));
    let report: serde_json::Value = serde_json::from_str(&read(&out.path().join("report.json"))).unwrap();
    assert_eq!(report["support_size"], 0);
}

#[test]
fn fit_rejects_invalid_gamma_with_exit_2() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "10", "--p", "5", "--T", "1", "--seed", "2", "--out-dir",
        data.path().to_str().unwrap(),
    ]);
    let err = run_err(
        &[
            "fit", "--x", data.path().join("X.csv").to_str().unwrap(), "--y",
            data.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--lambda", "0.5",
            "--gamma", "0.5", "--out-dir", out.path().to_str().unwrap(),
        ],
        2,
    );
    assert!(String::from_utf8_lossy(&err.stderr).contains("gamma"));
    let record: serde_json::Value =
        serde_json::from_str(&read(&out.path().join("error.json"))).unwrap();
    assert_eq!(record["kind"], "validation");
}

#[test]
fn missing_input_file_exits_4() {
    let out = tempfile::tempdir().unwrap();
    run_err(
        &[
            "fit", "--x", "/nonexistent/X.csv", "--y", "/nonexistent/y.csv", "--penalty",
            "mcp", "--lambda", "1", "--out-dir", out.path().to_str().unwrap(),
        ],
        4,
    );
}

#[test]
fn csv_rejects_non_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("X.csv"), "1.0,0.0\nNaN,1.0\n").unwrap();
    std::fs::write(dir.path().join("y.csv"), "1.0\n2.0\n").unwrap();
    let err = run_err(
        &[
            "fit", "--x", dir.path().join("X.csv").to_str().unwrap(), "--y",
            dir.path().join("y.csv").to_str().unwrap(), "--penalty", "scad", "--lambda", "1",
            "--out-dir", dir.path().join("out").to_str().unwrap(),
        ],
        2,
    );
    let msg = String::from_utf8_lossy(&err.stderr);
    assert!(msg.contains("line 2") && msg.contains("non-finite"), "{msg}");
}

#[test]
fn no_normalize_requires_unit_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("X.csv"), "2.0,0.0\n0.0,1.0\n").unwrap();
    std::fs::write(dir.path().join("y.csv"), "1.0\n2.0\n").unwrap();
    run_err(
        &[
            "fit", "--x", dir.path().join("X.csv").to_str().unwrap(), "--y",
            dir.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--lambda", "0.5",
            "--no-normalize", "--out-dir", dir.path().join("out").to_str().unwrap(),
        ],
        2,
    );
}

#[test]
fn fit_writes_scale_factors_when_normalizing() {
    let dir = tempfile::tempdir().unwrap();
    // Orthogonal raw columns with norm 5.
    std::fs::write(dir.path().join("X.csv"), "3.0,4.0\n4.0,-3.0\n").unwrap();
    std::fs::write(dir.path().join("y.csv"), "1.0\n2.0\n").unwrap();
    let out = dir.path().join("out");
    run_ok(&[
        "fit", "--x", dir.path().join("X.csv").to_str().unwrap(), "--y",
        dir.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--lambda", "0.9",
        "--out-dir", out.to_str().unwrap(),
    ]);
    let scales = read(&out.join("column_scales.csv"));
    let values: Vec<f64> = scales.lines().map(|l| l.parse().unwrap()).collect();
    assert!((values[0] - 5.0).abs() < 1e-12);
    assert!((values[1] - 5.0).abs() < 1e-12);
}

#[test]
fn path_select_none_and_tiny_grid() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "20", "--p", "10", "--T", "2", "--sigma", "0.05", "--seed", "4",
        "--out-dir", data.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "path", "--x", data.path().join("X.csv").to_str().unwrap(), "--y",
        data.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--M", "1",
        "--select", "none", "--out-dir", out.path().to_str().unwrap(),
    ]);
    let jsonl = read(&out.path().join("path.jsonl"));
    let lines: Vec<&str> = jsonl.lines().collect();
    assert_eq!(lines.len(), 2, "M=1 must give two path records");
    assert!(!out.path().join("selected.csv").exists());
    // Records have no beta field unless --emit-beta is passed.
    assert!(!lines[0].contains("\"beta\""));
}

#[test]
fn path_emit_beta_includes_coefficients() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "20", "--p", "8", "--T", "1", "--sigma", "0.05", "--seed", "6",
        "--out-dir", data.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "path", "--x", data.path().join("X.csv").to_str().unwrap(), "--y",
        data.path().join("y.csv").to_str().unwrap(), "--penalty", "scad", "--M", "5",
        "--emit-beta", "--select", "hbic", "--out-dir", out.path().to_str().unwrap(),
    ]);
    let jsonl = read(&out.path().join("path.jsonl"));
    assert!(jsonl.lines().all(|l| l.contains("\"beta\"")));
    assert!(out.path().join("selected.csv").exists());
}

#[test]
fn bench_runs_shipped_desk_grid() {
    let out = tempfile::tempdir().unwrap();
    let grid = concat!(env!("CARGO_MANIFEST_DIR"), "/../../grids/desk_accuracy.grid");
    let started = std::time::Instant::now();
    run_ok(&[
        "bench", "--grid-file", grid, "--replications", "1", "--seed", "1", "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(started.elapsed().as_secs() < 60, "one-replication smoke run budget");
    let csv = read(&out.path().join("aggregates.csv"));
    assert_eq!(csv.lines().count(), 5, "header plus four cells:\n{csv}");
    assert!(csv.contains("desk_scad_ssn"));
    assert!(out.path().join("timings.csv").exists());
    let jsonl = read(&out.path().join("results.jsonl"));
    let reps = jsonl.lines().filter(|l| l.contains("\"replication\"")).count();
    let aggs = jsonl.lines().filter(|l| l.contains("\"aggregate\"")).count();
    assert_eq!((reps, aggs), (4, 4));
}

#[test]
fn bench_rejects_malformed_grid_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("bad.grid");
    std::fs::write(&grid, "n=10 p=5 r=0.1 sigma=0.1 T=1 penalty=mcp solver=ssn\nwhat\n").unwrap();
    let err = run_err(
        &[
            "bench", "--grid-file", grid.to_str().unwrap(), "--replications", "1", "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        2,
    );
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 2"));
}

#[test]
fn bench_empty_grid_succeeds_with_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("empty.grid");
    std::fs::write(&grid, "# no cells\n").unwrap();
    run_ok(&[
        "bench", "--grid-file", grid.to_str().unwrap(), "--replications", "3", "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    let csv = read(&dir.path().join("out").join("aggregates.csv"));
    assert_eq!(csv.lines().count(), 1, "header only");
}

#[test]
fn cold_fit_flag_works_on_easy_data() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen", "--n", "60", "--p", "20", "--T", "2", "--sigma", "0.05", "--seed", "8",
        "--out-dir", data.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "fit", "--x", data.path().join("X.csv").to_str().unwrap(), "--y",
        data.path().join("y.csv").to_str().unwrap(), "--penalty", "mcp", "--lambda", "0.5",
        "--cold", "--out-dir", out.path().to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.path().join("report.json"))).unwrap();
    assert_eq!(report["mode"], "cold");
    assert_eq!(report["converged_by"], "active_set_fixed");
}
