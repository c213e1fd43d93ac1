use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Float;
use serde_json::{json, Value};

use fibred_core::acceptance::{acceptance_report, run_acceptance};
use fibred_core::catalog::{catalog_export, catalog_get, catalog_list, CatalogEntry, Claim};
use fibred_core::duality::exceptional::bits_for_digits;
use fibred_core::duality::{
    condition_eval, density_from_dual, dual_interval, natural_dual_solve, transfer_apply, ConditionId, Family,
    NaturalDual,
};
use fibred_core::fibred::{family_s, family_t, named_map, MapSpec, ParamTriple, PiecewiseMap};
use fibred_core::numlab::{
    birkhoff_histogram, l1_compare, reference_weights, ulam_stationary, EmpiricalDensity, DEFAULT_CHAINS,
    DEFAULT_TRUNCATION,
};
use fibred_core::transport::{
    density_rows, kuzmin_check_series, sample_points, Density, Outcome,
};
use fibred_core::verify::{verify_entry, RunReport, VerifyOptions};

/// Exact computations for piecewise fractional linear interval maps.
#[derive(Parser)]
#[command(name = "fibred", version)]
struct Cli {
    /// Write JSON instead of text or CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write the main output to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 40, value_name = "DIGITS")]
    precision: u32,
    /// Explicit series terms (density, verify) or digits per family (simulate).
    #[arg(long, global = true, value_name = "J")]
    truncation: Option<usize>,
    /// Grid points (density) or histogram cells (simulate, verify).
    #[arg(long, global = true, value_name = "N")]
    cells: Option<usize>,
    /// Orbit length for simulation.
    #[arg(long, global = true, default_value_t = 1_000_000, value_name = "M")]
    iters: usize,
    /// Include wall-clock timings in reports.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a catalog entry, or the acceptance suite with `all`.
    Verify { target: String },
    /// Evaluate all eight conditions and the natural dual of every family.
    Conditions { lambda: String, mu: String, nu: String },
    /// Tabulate the known invariant density of a map.
    Density { map: String },
    /// Estimate the invariant density numerically.
    Simulate {
        map: String,
        #[arg(long, value_enum, default_value_t = Method::Ulam)]
        method: Method,
    },
    /// Catalog of named instances.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Export,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ulam,
    Orbit,
}

/// Usage errors exit with 2, failed checks with 1.
enum Failure {
    Usage(String),
    Check(String),
}

type CmdResult = Result<(String, i32), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn check(e: impl std::fmt::Display) -> Failure {
    Failure::Check(e.to_string())
}

fn options(cli: &Cli) -> VerifyOptions {
    let d = VerifyOptions::default();
    VerifyOptions {
        digits: cli.precision,
        truncation: cli.truncation.unwrap_or(d.truncation),
        seed: cli.seed,
        cells: cli.cells.unwrap_or(d.cells),
        iters: cli.iters,
        timings: cli.timings,
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn summarize(r: &RunReport) {
    let count = |o: Outcome| r.checks.iter().filter(|c| c.verdict == o).count();
    for c in r.checks.iter().filter(|c| c.verdict != Outcome::Pass) {
        eprintln!("{:?} {}: {}", c.verdict, c.name, c.detail);
    }
    eprintln!(
        "{}: {} checks, {} pass, {} fail, {} inconclusive",
        r.target,
        r.checks.len(),
        count(Outcome::Pass),
        count(Outcome::Fail),
        count(Outcome::Inconclusive)
    );
}

fn report_text(r: &RunReport) -> String {
    let mut s = String::new();
    for c in &r.checks {
        let v = match c.verdict {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        };
        s.push_str(&format!("{v:<12} {:<44} {}\n", c.name, c.detail));
    }
    s
}

fn cmd_verify(cli: &Cli, target: &str) -> CmdResult {
    let opts = options(cli);
    let report = if target == "all" {
        let results = run_acceptance(&opts);
        for r in &results {
            eprintln!("criterion {:>2} {} {}", r.id, if r.passed() { "PASS" } else { "FAIL" }, r.title);
        }
        acceptance_report(&results)
    } else {
        let entry = catalog_get(target).ok_or_else(|| usage(format!("unknown catalog entry {target:?}")))?;
        verify_entry(&entry, &opts)
    };
    summarize(&report);
    let out = if cli.json { to_json(&report) } else { report_text(&report) };
    Ok((out, report.exit_code()))
}

fn cmd_conditions(cli: &Cli, l: &str, m: &str, n: &str) -> CmdResult {
    let t = ParamTriple::parse(l, m, n).map_err(usage)?;
    let conditions: serde_json::Map<String, Value> = ConditionId::ALL
        .iter()
        .map(|id| (id.name().to_string(), json!(condition_eval(*id, &t).to_string())))
        .collect();
    let families: Vec<Value> = Family::ALL
        .iter()
        .map(|&f| {
            let map = if f == Family::T { family_t(&t) } else { family_s(&t, f.flipped()) };
            let mut v = json!({"family": f.name()});
            match map.map_err(|e| e.to_string()).and_then(|p| natural_dual_solve(&p).map_err(|e| e.to_string())) {
                Ok(NaturalDual::Unique(psi)) => {
                    let d = dual_interval(&psi);
                    v["natural_dual"] = json!("unique");
                    v["psi"] = serde_json::to_value(&psi).unwrap();
                    v["dual"] = json!(d.to_string());
                    v["density"] = match density_from_dual(&d) {
                        Ok(g) => json!(g.to_string()),
                        Err(e) => json!(format!("inadmissible: {e}")),
                    };
                }
                Ok(NaturalDual::None) => v["natural_dual"] = json!("none"),
                Ok(NaturalDual::Degenerate(b)) => {
                    v["natural_dual"] = json!("degenerate");
                    v["basis"] = serde_json::to_value(&b).unwrap();
                }
                Err(e) => v["error"] = json!(e),
            }
            v
        })
        .collect();
    let out = json!({"triple": t, "conditions": conditions, "families": families});
    if !cli.json {
        let zero: Vec<&str> = ConditionId::ALL
            .iter()
            .filter(|id| condition_eval(**id, &t) == 0)
            .map(|id| id.name())
            .collect();
        eprintln!("vanishing: {}", if zero.is_empty() { "none".into() } else { zero.join(", ") });
    }
    Ok((to_json(&out), 0))
}

/// A map named by a JSON file, a catalog entry (`ex1`, `ex1-Z`), or a
/// constructor with parameters (`T:3/4,36/7,9`, `times_a:3`).
struct ResolvedMap {
    label: String,
    map: PiecewiseMap,
    density: Option<Density>,
}

fn catalog_density(e: &CatalogEntry, label: &str) -> Option<Density> {
    e.claims.iter().find_map(|c| match &c.claim {
        Claim::KuzminExact { map, density } if map.label == label => Some(Density::Rational(density.clone())),
        Claim::SeriesKuzmin { map, density, .. } if map.label == label => Some(match density.parts() {
            [] => Density::Rational(density.head().clone()),
            _ => Density::Series(density.clone()),
        }),
        _ => None,
    })
}

fn natural_density(p: &PiecewiseMap) -> Option<Density> {
    let psi = natural_dual_solve(p).ok()?;
    density_from_dual(&dual_interval(psi.psi()?)).ok()
}

fn resolve_map(spec: &str) -> Result<ResolvedMap, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(usage)?;
        let ms: MapSpec = serde_json::from_str(&text).map_err(|e| usage(format!("{spec}: invalid map JSON: {e}")))?;
        let map = ms.build().map_err(|e| usage(format!("{spec}: {e}")))?;
        let density = natural_density(&map);
        return Ok(ResolvedMap { label: spec.into(), map, density });
    }
    let from_entry = |e: &CatalogEntry, label: Option<&str>| -> Option<ResolvedMap> {
        let m = match label {
            Some(l) => e.maps.iter().find(|m| m.label == l)?,
            None => e.maps.first()?,
        };
        let density = catalog_density(e, &m.label).or_else(|| natural_density(&m.map));
        Some(ResolvedMap {
            label: format!("{}-{}", e.name, m.label),
            map: m.map.clone(),
            density,
        })
    };
    if let Some(e) = catalog_get(spec) {
        return from_entry(&e, None).ok_or_else(|| usage(format!("catalog entry {spec} has no map")));
    }
    if let Some((name, label)) = spec.rsplit_once('-') {
        if let Some(r) = catalog_get(name).and_then(|e| from_entry(&e, Some(label))) {
            return Ok(r);
        }
    }
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, p.split(',').map(|s| s.trim().to_string()).collect()),
        None => (spec, Vec::new()),
    };
    let map = named_map(name, &params).map_err(|e| usage(format!("{spec}: {e}")))?;
    let density = natural_density(&map);
    Ok(ResolvedMap { label: spec.into(), map, density })
}

/// Default number of terms in the `g_truncated` column.
const DENSITY_TERMS: usize = 1000;

fn decimal(x: &Float, digits: u32) -> String {
    x.to_string_radix(10, Some(digits as usize))
}

fn cmd_density(cli: &Cli, spec: &str) -> CmdResult {
    let r = resolve_map(spec)?;
    let d = r.density.ok_or_else(|| check(format!("no known invariant density for {}", r.label)))?;
    let n = cli.cells.unwrap_or(25);
    let j = cli.truncation.unwrap_or(DENSITY_TERMS);
    let digits = cli.precision;
    let rows = density_rows(&d, n, digits, j).map_err(check)?;
    let series = d.as_series();
    let residuals: Vec<f64> = if let (true, Density::Rational(f)) = (r.map.is_finite(), &d) {
        // exact: (L f - f)(x) in rationals
        let diff = &transfer_apply(&r.map, f).map_err(check)? - f;
        sample_points(n)
            .iter()
            .map(|x| diff.eval(x).map(|v| v.to_f64()))
            .collect::<Result<_, _>>()
            .map_err(check)?
    } else {
        // certified: explicit terms plus asymptotic tails
        let explicit = VerifyOptions::default().truncation;
        kuzmin_check_series(&r.map, &series, &sample_points(n), 1e-8, digits, explicit)
            .map_err(check)?
            .points
            .iter()
            .map(|p| p.residual)
            .collect()
    };
    let prec = bits_for_digits(digits);
    eprintln!("{}: density {d}", r.label);
    eprintln!("max |kuzmin residual| {:.3e}", residuals.iter().fold(0.0f64, |a, r| a.max(r.abs())));
    let out = if cli.json {
        let rows: Vec<Value> = rows
            .iter()
            .zip(&residuals)
            .map(|((x, g, b), res)| {
                json!({"x": x.to_string(), "g_truncated": decimal(g, digits), "certified_bound": b, "kuzmin_residual": res})
            })
            .collect();
        to_json(&json!({"map": r.label, "density": d.to_string(), "rows": rows}))
    } else {
        let mut s = String::from("x,g_truncated,certified_bound,kuzmin_residual\n");
        for ((x, g, b), res) in rows.iter().zip(&residuals) {
            s.push_str(&format!("{},{},{b:e},{res:e}\n", decimal(&Float::with_val(prec, x), 17), decimal(g, digits)));
        }
        s
    };
    Ok((out, 0))
}

fn cmd_simulate(cli: &Cli, spec: &str, method: Method) -> CmdResult {
    let r = resolve_map(spec)?;
    let digits = cli.precision.min(30);
    let (empirical, extra): (EmpiricalDensity, Value) = match method {
        Method::Ulam => {
            let cells = cli.cells.unwrap_or(1000);
            let u = ulam_stationary(&r.map, cells, cli.truncation.unwrap_or(DEFAULT_TRUNCATION)).map_err(check)?;
            let extra = json!({
                "method": "ulam", "iterations": u.iterations, "converged": u.converged,
                "residual": u.residual, "discarded_mass": u.discarded_mass,
            });
            if !u.converged {
                eprintln!("power iteration did not converge (residual {:e})", u.residual);
            }
            (u.density, extra)
        }
        Method::Orbit => {
            let cells = cli.cells.unwrap_or(100);
            let b = birkhoff_histogram(&r.map, cli.seed, cli.iters, cells, digits, DEFAULT_CHAINS).map_err(check)?;
            let extra = json!({
                "method": "orbit", "iterations": cli.iters, "seed": cli.seed, "jitter_events": b.jitter_events,
            });
            (b.density, extra)
        }
    };
    let n = empirical.n_cells();
    let reference = match &r.density {
        Some(Density::Rational(f)) => reference_weights(f, n, digits).ok(),
        _ => None,
    };
    let l1 = r.density.as_ref().map(|d| l1_compare(&empirical, d, digits, DENSITY_TERMS));
    match &l1 {
        Some(Ok(l)) => eprintln!("{}: L1 distance to {} is {:.5}", r.label, r.density.as_ref().unwrap(), l.distance),
        Some(Err(e)) => eprintln!("{}: no comparison: {e}", r.label),
        None => eprintln!("{}: no known density to compare with", r.label),
    }
    let out = if cli.json {
        let cells: Vec<Value> = (0..n)
            .map(|i| {
                let (lo, hi) = empirical.edges(i);
                json!({
                    "cell_left": lo, "cell_right": hi, "weight": empirical.weights[i],
                    "exact_reference": reference.as_ref().map(|w| w[i]),
                })
            })
            .collect();
        let l1 = match l1 {
            Some(Ok(l)) => serde_json::to_value(l).unwrap(),
            Some(Err(e)) => json!(e.to_string()),
            None => Value::Null,
        };
        to_json(&json!({"map": r.label, "run": extra, "l1": l1, "cells": cells}))
    } else {
        let mut s = String::from("cell_left,cell_right,weight,exact_reference\n");
        for i in 0..n {
            let (lo, hi) = empirical.edges(i);
            let refw = reference.as_ref().map_or(String::new(), |w| format!("{:e}", w[i]));
            s.push_str(&format!("{lo},{hi},{:e},{refw}\n", empirical.weights[i]));
        }
        s
    };
    Ok((out, 0))
}

fn cmd_catalog(cli: &Cli, action: &CatalogAction) -> CmdResult {
    Ok(match action {
        CatalogAction::Export => (to_json(&catalog_export()), 0),
        CatalogAction::List if cli.json => {
            let v: Vec<Value> = catalog_list().iter().map(|e| json!({"name": e.name, "summary": e.summary})).collect();
            (to_json(&v), 0)
        }
        CatalogAction::List => {
            let s: String = catalog_list().iter().map(|e| format!("{:<20} {}\n", e.name, e.summary)).collect();
            (s, 0)
        }
    })
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Verify { target } => cmd_verify(cli, target),
        Command::Conditions { lambda, mu, nu } => cmd_conditions(cli, lambda, mu, nu),
        Command::Density { map } => cmd_density(cli, map),
        Command::Simulate { map, method } => cmd_simulate(cli, map, *method),
        Command::Catalog { action } => cmd_catalog(cli, action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code as u8)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
