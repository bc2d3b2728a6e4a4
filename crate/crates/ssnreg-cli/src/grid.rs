//! Line-oriented `key=value` benchmark grid files.
//!
//! One cell per line, `#` comments and blank lines ignored:
//!
//! ```text
//! n=200 p=1000 r=0.3 sigma=0.1 T=14 penalty=mcp solver=ssn M=200 J=1
//! ```
//!
//! Required keys: `n`, `p`, `r`, `sigma`, `T`, `penalty`, `solver`.
//! Optional: `gamma` (family default), `selector` (vsc), `alpha` (1e-5),
//! `M` (100), `J` (1), `delta` (1e-3), `max_sweeps` (10000), `name`.

use ssnreg::bench::{BenchCell, Selector};
use ssnreg::cd::CdOptions;
use ssnreg::path::{PathOptions, SolverKind};
use ssnreg::penalty::PenaltyFamily;
use ssnreg::simgen::SimConfig;

use crate::CliError;

fn bad(lineno: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("grid line {lineno}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| bad(lineno, format!("cannot parse {key}='{value}'")))
}

pub fn parse_grid(content: &str) -> Result<Vec<BenchCell>, CliError> {
    let mut cells = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        let mut name: Option<String> = None;
        let mut n: Option<usize> = None;
        let mut p: Option<usize> = None;
        let mut r: Option<f64> = None;
        let mut sigma: Option<f64> = None;
        let mut sparsity: Option<usize> = None;
        let mut family: Option<PenaltyFamily> = None;
        let mut gamma: Option<f64> = None;
        let mut solver: Option<SolverKind> = None;
        let mut selector = Selector::Vsc;
        let mut path = PathOptions::default();
        let mut cd = CdOptions::default();

        for tok in line.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| bad(lineno, format!("expected key=value, found '{tok}'")))?;
            match key {
                "name" => name = Some(value.to_string()),
                "n" => n = Some(parse_num(lineno, key, value)?),
                "p" => p = Some(parse_num(lineno, key, value)?),
                "r" => r = Some(parse_num(lineno, key, value)?),
                "sigma" => sigma = Some(parse_num(lineno, key, value)?),
                "T" => sparsity = Some(parse_num(lineno, key, value)?),
                "penalty" => {
                    family = Some(match value {
                        "mcp" => PenaltyFamily::Mcp,
                        "scad" => PenaltyFamily::Scad,
                        other => return Err(bad(lineno, format!("unknown penalty '{other}'"))),
                    })
                }
                "gamma" => gamma = Some(parse_num(lineno, key, value)?),
                "solver" => {
                    solver = Some(match value {
                        "ssn" => SolverKind::Ssn,
                        "cd" => SolverKind::Cd,
                        other => return Err(bad(lineno, format!("unknown solver '{other}'"))),
                    })
                }
                "selector" => {
                    selector = match value {
                        "vsc" => Selector::Vsc,
                        "hbic" => Selector::Hbic,
                        other => return Err(bad(lineno, format!("unknown selector '{other}'"))),
                    }
                }
                "alpha" => path.alpha = parse_num(lineno, key, value)?,
                "M" => path.m = parse_num(lineno, key, value)?,
                "J" => path.j = parse_num(lineno, key, value)?,
                "delta" => cd.delta = parse_num(lineno, key, value)?,
                "max_sweeps" => cd.max_sweeps = parse_num(lineno, key, value)?,
                other => return Err(bad(lineno, format!("unknown key '{other}'"))),
            }
        }

        let mut missing = Vec::new();
        for (key, present) in [
            ("n", n.is_some()),
            ("p", p.is_some()),
            ("r", r.is_some()),
            ("sigma", sigma.is_some()),
            ("T", sparsity.is_some()),
            ("penalty", family.is_some()),
            ("solver", solver.is_some()),
        ] {
            if !present {
                missing.push(key);
            }
        }
        if !missing.is_empty() {
            return Err(bad(lineno, format!("missing keys: {}", missing.join(", "))));
        }
        let (family, solver) = (family.unwrap(), solver.unwrap());
        let config = SimConfig {
            n: n.unwrap(),
            p: p.unwrap(),
            r: r.unwrap(),
            sigma: sigma.unwrap(),
            sparsity: sparsity.unwrap(),
            seed: 0,
        };
        config
            .validate()
            .map_err(|e| bad(lineno, e))?;
        let gamma = gamma.unwrap_or_else(|| family.default_gamma());
        path.cd = cd;
        let name = name.unwrap_or_else(|| {
            format!(
                "p{}_r{}_sigma{}_{}_{}",
                config.p, config.r, config.sigma, family, solver
            )
        });
        cells.push(BenchCell {
            name,
            config,
            family,
            gamma,
            solver,
            selector,
            path,
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_cell() {
        let cells = parse_grid(
            "# comment\n\nn=20 p=40 r=0.3 sigma=0.1 T=3 penalty=scad solver=cd selector=hbic M=50 J=2 alpha=1e-4 delta=1e-4 max_sweeps=500 gamma=3.1 name=demo\n",
        )
        .unwrap();
        assert_eq!(cells.len(), 1);
        let cell = &cells[0];
        assert_eq!(cell.name, "demo");
        assert_eq!(cell.family, PenaltyFamily::Scad);
        assert_eq!(cell.solver, SolverKind::Cd);
        assert_eq!(cell.selector, Selector::Hbic);
        assert_eq!(cell.path.m, 50);
        assert_eq!(cell.path.j, 2);
        assert_eq!(cell.path.cd.max_sweeps, 500);
        assert_eq!(cell.gamma, 3.1);
    }

    #[test]
    fn defaults_apply() {
        let cells =
            parse_grid("n=20 p=40 r=0.0 sigma=0.1 T=3 penalty=mcp solver=ssn\n").unwrap();
        let cell = &cells[0];
        assert_eq!(cell.gamma, 2.7);
        assert_eq!(cell.selector, Selector::Vsc);
        assert_eq!(cell.path.m, 100);
        assert_eq!(cell.name, "p40_r0_sigma0.1_mcp_ssn");
    }

    #[test]
    fn rejects_malformed_lines_with_line_number() {
        let err = parse_grid("n=20 p=40\nbogus\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_grid("# ok\nn=20 p=40 r=0.0 sigma=0.1 T=3 penalty=mcp solver=ssn q=1\n")
            .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err =
            parse_grid("n=20 p=40 r=zzz sigma=0.1 T=3 penalty=mcp solver=ssn\n").unwrap_err();
        assert!(err.to_string().contains("r='zzz'"), "{err}");
    }

    #[test]
    fn empty_grid_is_ok() {
        assert!(parse_grid("# nothing here\n\n").unwrap().is_empty());
    }
}
