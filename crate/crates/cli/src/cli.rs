//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use flatdet::graded::io::ComplexJson;
use flatdet::hodge::{torsion_anomaly_experiment, MetricFamilyJson};
use flatdet::linalg::{c, real};
use flatdet::parametrix::{heat_coefficients, ApproximateHeatKernel, Potential, SpectralHeatOracle};
use flatdet::report::complex_json;
use flatdet::ruelle::{
    cat_map_catalog, orbit_log_sdet, ruelle_zeta_truncated, subshift_catalog, zeta_closed_form_cat,
    zeta_transfer_determinant, CatMap, Subshift,
};
use flatdet::twisted::{build_twisted_cochain, circle, combinatorial_torsion, TwistedCWData};
use flatdet::zeta::{circle_torsion, f_closed_form, f_mellin, log_sdet_via_zeta, MellinSettings, SpectrumJson};

use crate::canonical;
use crate::config::{cli_value, parse_angle, parse_grid, ExperimentId};
use crate::error::CliError;
use crate::experiments::{self, subshift_zeta::parse_binary_matrix};
use crate::runner::{self, RunRequest};

#[derive(Debug, Parser)]
#[command(name = "flatdet", version, about = "Flat superdeterminants, zeta-regularized torsion and Ruelle zeta experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment: `run <experiment> [--config F] [--seed N] [--output F]
    /// [--no-cache] [--jobs N] [--tol name=value] [--<parameter> value]...`
    Run {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// List experiments with their default parameters and tolerances.
    List,
    #[command(subcommand)]
    Zeta(ZetaCommand),
    #[command(subcommand)]
    Torsion(TorsionCommand),
    #[command(subcommand)]
    Hodge(HodgeCommand),
    #[command(subcommand)]
    Heat(HeatCommand),
    #[command(subcommand)]
    Ruelle(RuelleCommand),
}

#[derive(Debug, Subcommand)]
pub enum ZetaCommand {
    /// Evaluate F(λ, s) and log sdet for a spectrum file.
    Eval {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s_im: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        /// Also integrate the cutoff-Mellin transform.
        #[arg(long)]
        mellin: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum TorsionCommand {
    /// Spectral and combinatorial torsion of the twisted circle.
    Circle {
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Combinatorial torsion of a twisted CW complex.
    Cw {
        #[arg(long)]
        file: PathBuf,
        /// Generator angles replacing the file's character.
        #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
        theta: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HodgeCommand {
    /// Anomaly ledger of a complex under a metric family.
    Anomaly {
        #[arg(long)]
        complex: PathBuf,
        /// Name of the differential in the complex file.
        #[arg(long, default_value = "d")]
        map: String,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, value_parser = parse_grid, default_value = "-0.5:0.5:0.1", allow_hyphen_values = true)]
        tau_grid: std::vec::Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HeatCommand {
    /// Parametrix kernel, oracle kernel and heat coefficients.
    Parametrix {
        #[arg(long, default_value = "sin")]
        potential: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 0.01)]
        t: f64,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, default_value_t = 6)]
        coefficients: usize,
    },
}

#[derive(Debug, Args)]
pub struct ZetaGrid {
    #[arg(long, value_parser = parse_angle, default_value = "pi", allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, value_parser = parse_grid, default_value = "1.5:3:0.1", allow_hyphen_values = true)]
    lambda_grid: std::vec::Vec<f64>,
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    /// CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum RuelleCommand {
    /// Truncated zeta, closed form and log sdet of a cat-map suspension.
    Cat {
        #[arg(long, default_value = "2,1,1,1")]
        matrix: String,
        #[command(flatten)]
        grid: ZetaGrid,
    },
    /// Truncated zeta and transfer determinant of a suspended subshift.
    Subshift {
        #[arg(long, default_value = "1,1;1,0")]
        matrix: String,
        #[arg(long, value_delimiter = ',', default_value = "1,1")]
        roof: Vec<f64>,
        #[command(flatten)]
        grid: ZetaGrid,
    },
}

/// Splits `run` arguments into a request.
pub fn parse_run_args(args: &[String]) -> Result<RunRequest, CliError> {
    let mut req = RunRequest::default();
    let mut i = 0;
    let usage = |m: String| CliError::Usage(m);
    while i < args.len() {
        let arg = &args[i];
        let Some(flag) = arg.strip_prefix("--") else {
            if req.experiment.is_some() {
                return Err(usage(format!("unexpected argument {arg:?}")));
            }
            req.experiment = Some(arg.parse()?);
            i += 1;
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        let takes_value = !matches!(name.as_str(), "no-cache");
        let value = if !takes_value {
            None
        } else if inline.is_some() {
            inline
        } else if args.get(i + 1).is_some_and(|v| !v.starts_with("--")) {
            i += 1;
            Some(args[i].clone())
        } else {
            None
        };
        let need = |v: Option<String>| v.ok_or_else(|| usage(format!("--{name} needs a value")));
        match name.as_str() {
            "config" => req.config = Some(PathBuf::from(need(value)?)),
            "output" => req.output = Some(PathBuf::from(need(value)?)),
            "seed" => {
                let v = need(value)?;
                req.seed = Some(v.parse().map_err(|_| usage(format!("--seed: {v:?} is not an unsigned integer")))?);
            }
            "jobs" => {
                let v = need(value)?;
                let n: usize = v.parse().map_err(|_| usage(format!("--jobs: {v:?} is not a positive integer")))?;
                if n == 0 {
                    return Err(usage("--jobs must be positive".into()));
                }
                req.jobs = Some(n);
            }
            "no-cache" => req.no_cache = true,
            "tol" => {
                let v = need(value)?;
                let (k, x) = v.split_once('=').ok_or_else(|| usage(format!("--tol expects name=value, got {v:?}")))?;
                req.tolerances.insert(k.replace('-', "_"), cli_value(x));
            }
            _ => {
                let v = value.map_or(Value::Bool(true), |v| cli_value(&v));
                req.parameters.insert(name.replace('-', "_"), v);
            }
        }
        i += 1;
    }
    Ok(req)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn print(v: &Value) {
    print!("{}", canonical::to_pretty(v));
}

fn list() -> Value {
    let items: Vec<Value> = ExperimentId::ALL
        .iter()
        .map(|&e| {
            let r = experiments::resolve(e, 0, &Map::new(), &Map::new()).map(|r| r.echo).unwrap_or(Value::Null);
            json!({ "experiment": e.name(), "parameters": r["parameters"], "tolerances": r["tolerances"] })
        })
        .collect();
    Value::Array(items)
}

fn zeta_table(rows: Vec<Value>, csv: bool, header: &[&str]) {
    if !csv {
        print(&Value::Array(rows));
        return;
    }
    println!("{}", header.join(","));
    for r in rows {
        let cells: Vec<String> = header
            .iter()
            .map(|h| {
                let (key, part) = match h.rsplit_once('_') {
                    Some((k, p)) if p == "re" || p == "im" => (k, Some(p)),
                    _ => (*h, None),
                };
                let v = &r[key];
                match part {
                    Some("re") => v[0].to_string(),
                    Some("im") => v[1].to_string(),
                    _ => v.to_string(),
                }
            })
            .collect();
        println!("{}", cells.join(","));
    }
}

fn tool(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { .. } => unreachable!(),
        Command::List => print(&list()),
        Command::Zeta(ZetaCommand::Eval { spectrum, s, s_im, lambda, mellin }) => {
            let json: SpectrumJson = serde_json::from_str(&read(&spectrum)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", spectrum.display())))?;
            let spec = json.to_spectrum()?;
            let (s, l) = (c(s, s_im), real(lambda));
            let mut out = json!({ "s": complex_json(s), "lambda": lambda });
            out["f_closed_form"] = complex_json(f_closed_form(&spec, l, s)?);
            if mellin {
                let m = f_mellin(&spec, l, s, &MellinSettings::default())?;
                out["f_mellin"] = json!({ "value": complex_json(m.value), "cutoff": m.cutoff, "last_change": m.last_change });
            }
            match log_sdet_via_zeta(&spec) {
                Ok(v) => out["log_sdet"] = complex_json(v),
                Err(e) => out["log_sdet_error"] = json!(e.to_string()),
            }
            print(&out);
        }
        Command::Torsion(TorsionCommand::Circle { theta, radius }) => {
            let analytic = circle_torsion(theta, radius)?;
            let comb = combinatorial_torsion(&build_twisted_cochain(&circle(theta))?)?;
            print(&json!({
                "theta": theta,
                "radius": radius,
                "analytic": analytic,
                "combinatorial": comb.torsion,
                "closed_form": 2.0 * (theta / 2.0).sin().abs(),
            }));
        }
        Command::Torsion(TorsionCommand::Cw { file, theta }) => {
            let mut data = TwistedCWData::parse(&read(&file)?)?;
            if !theta.is_empty() {
                data = data.with_angles(&theta)?;
            }
            let t = combinatorial_torsion(&build_twisted_cochain(&data)?)?;
            print(&json!({ "torsion": t.torsion, "log_sdet": complex_json(t.log_sdet), "cells": data.cells }));
        }
        Command::Hodge(HodgeCommand::Anomaly { complex, map, metric, tau_grid }) => {
            let d = ComplexJson::parse(&read(&complex)?)?.map(&map)?;
            let fam: MetricFamilyJson =
                serde_json::from_str(&read(&metric)?).map_err(|e| CliError::Usage(format!("{}: {e}", metric.display())))?;
            let rep = torsion_anomaly_experiment(&d, &fam.to_family()?, &tau_grid)?;
            print(&serde_json::to_value(&rep).unwrap_or(Value::Null));
            return Ok(if rep.passed() { 0 } else { 1 });
        }
        Command::Heat(HeatCommand::Parametrix { potential, depth, t, x, y, coefficients }) => {
            let v = Potential::parse(&potential)?;
            let k = ApproximateHeatKernel::new(&v, depth)?;
            let y = y.unwrap_or(x);
            let oracle = SpectralHeatOracle::new(&v, t, SpectralHeatOracle::default_modes(t))?;
            let b = heat_coefficients(&v, coefficients, None)?;
            print(&json!({
                "potential": v.label(),
                "depth": depth,
                "t": t,
                "x": x,
                "y": y,
                "k_n": complex_json(k.k_n(t, x, y)),
                "s_n": complex_json(k.s_n(t, x, y)),
                "oracle": complex_json(oracle.eval(x, y)),
                "oracle_error": oracle.error_estimate,
                "heat_coefficients": b.iter().map(|c| json!({
                    "k": c.k,
                    "value": complex_json(c.value),
                    "over_sqrt_pi": c.over_sqrt_pi.to_string(),
                })).collect::<Vec<_>>(),
            }));
        }
        Command::Ruelle(RuelleCommand::Cat { matrix, grid }) => {
            let a = CatMap::parse(&matrix)?;
            let cat = cat_map_catalog(&a, grid.n_max, grid.alpha)?;
            let mut rows = Vec::new();
            for &l in &grid.lambda_grid {
                let z = ruelle_zeta_truncated(&cat, real(l))?;
                let sdet = orbit_log_sdet(&cat, real(l))?;
                rows.push(json!({
                    "lambda": l,
                    "zeta": complex_json(z.value),
                    "closed_form": complex_json(zeta_closed_form_cat(&a, grid.alpha, real(l))?),
                    "log_sdet": complex_json(sdet.value),
                    "tail_bound": z.tail_bound,
                }));
            }
            let header = ["lambda", "zeta_re", "zeta_im", "closed_form_re", "closed_form_im", "log_sdet_re", "log_sdet_im", "tail_bound"];
            zeta_table(rows, grid.csv, &header);
        }
        Command::Ruelle(RuelleCommand::Subshift { matrix, roof, grid }) => {
            let m = parse_binary_matrix(&matrix).map_err(CliError::Usage)?;
            let s = Subshift::new(m, roof)?;
            let cat = subshift_catalog(&s, grid.n_max, grid.alpha)?;
            for w in &cat.warnings {
                eprintln!("warning: {w}");
            }
            let mut rows = Vec::new();
            for &l in &grid.lambda_grid {
                let z = ruelle_zeta_truncated(&cat, real(l))?;
                rows.push(json!({
                    "lambda": l,
                    "zeta": complex_json(z.value),
                    "transfer_determinant": complex_json(zeta_transfer_determinant(&s, grid.alpha, real(l))),
                    "tail_bound": z.tail_bound,
                }));
            }
            let header = ["lambda", "zeta_re", "zeta_im", "transfer_determinant_re", "transfer_determinant_im", "tail_bound"];
            zeta_table(rows, grid.csv, &header);
        }
    }
    Ok(0)
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run { args } => parse_run_args(&args).and_then(|req| runner::run(&req)).map(|o| {
            eprintln!(
                "{} {} -> {}{}",
                if o.passed { "PASS" } else { "FAIL" },
                o.key,
                o.output.display(),
                if o.cache_hit { " (cached)" } else { "" }
            );
            o.exit_code()
        }),
        cmd => tool(cmd),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
