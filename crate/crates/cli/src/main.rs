//! Batch front-end: evaluates transforms on grids, compares predicted and
//! estimated tail asymptotics, runs the Monte Carlo cross-check, and drives
//! the named verification suites.
//!
//! Exit codes: 0 success, 1 tolerance failure in `verify`, 2 usage error,
//! 3 numerical failure.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use freemult::error::Error;
use freemult::free_mult::{breiman_predict, s_combine, s_power};
use freemult::id_laws::{id_tail_predict, InteriorSigma, LevyPair, SigmaLeftTail};
use freemult::matrix_mc::{hill_fit, product_spectrum};
use freemult::measure::{ExtendedMoment, MeasureSpec};
use freemult::regvar::{
    estimate_tail_from_s, geometric_grid, predict_power_tail, EstimateMode, LogPowerSv,
};
use freemult::scenarios;
use freemult::transforms::STransformHandle;

const SCHEMA: &str = "freemult/1";

#[derive(Parser)]
#[command(
    name = "freemult",
    version,
    about = "S-transform calculus for free multiplicative convolution",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit (x, ψ(−1/x), S(−1/x)) as CSV over a geometric grid.
    Transform(TransformArgs),
    /// Predicted vs estimated tail of μ^{⊠t}.
    Power(PowerArgs),
    /// Predicted vs estimated tail of a ⊠-infinitely-divisible law.
    Idtail(IdtailArgs),
    /// Breiman-factor prediction vs the estimate on the product handle.
    Breiman(BreimanArgs),
    /// Monte Carlo spectrum of the t-fold matrix product, with a Hill fit.
    Mc(McArgs),
    /// Run a named verification suite; exits 0 iff all tolerances pass.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// Measure as inline JSON or @path.
    #[arg(long)]
    measure: Option<String>,
    /// Geometric grid a:b:n (n points from 10^a to 10^b).
    #[arg(long, default_value = "6:16:11")]
    grid: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// JSON file supplying any of the above fields.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    measure: Option<String>,
    /// Convolution power t ≥ 1.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value = "8:16:9")]
    grid: String,
    /// Declared tail index of μ (derived automatically for Pareto).
    #[arg(long)]
    tail_index: Option<f64>,
    /// Declared tail constant of μ (derived automatically for Pareto).
    #[arg(long)]
    tail_constant: Option<f64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct IdtailArgs {
    /// Lévy pair as inline JSON or @path.
    #[arg(long)]
    pair: Option<String>,
    /// Declared left-tail index of σ (derived for σ-min interiors).
    #[arg(long)]
    sigma_alpha: Option<f64>,
    /// Declared left-tail constant of σ (derived for σ-min interiors).
    #[arg(long)]
    sigma_constant: Option<f64>,
    #[arg(long, default_value = "6:16:11")]
    grid: String,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct BreimanArgs {
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long, default_value = "8:16:9")]
    grid: String,
    #[arg(long)]
    mu_tail_index: Option<f64>,
    #[arg(long)]
    mu_tail_constant: Option<f64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    measure: Option<String>,
    /// Integer convolution power.
    #[arg(long)]
    t: Option<usize>,
    /// Matrix size.
    #[arg(long)]
    n: Option<usize>,
    /// Replicates.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Top order statistics for the Hill fit (default: 1% of the sample).
    #[arg(long)]
    k: Option<usize>,
    /// Also dump the eigenvalue sample as single-column CSV to this path.
    #[arg(long)]
    dump_eigenvalues: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of the named suites, or "all".
    #[arg(long)]
    suite: String,
    /// Emit the machine-readable report as JSON (to stdout or --out).
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Power(a) => cmd_power(a),
        Command::Idtail(a) => cmd_idtail(a),
        Command::Breiman(a) => cmd_breiman(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Verify(a) => return cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_) | Error::UnknownTag(_) | Error::OutOfRange { .. } => 2,
        _ => 3,
    }
}

// ----------------------------------------------------------------------
// Shared argument plumbing
// ----------------------------------------------------------------------

fn load_config(path: &Option<String>) -> Result<Value, Error> {
    match path {
        None => Ok(json!({})),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::InvalidSpec(format!("config {p}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("config {p}: {e}")))
        }
    }
}

fn resolve_str(flag: Option<String>, cfg: &Value, key: &str) -> Option<String> {
    flag.or_else(|| cfg.get(key).and_then(Value::as_str).map(str::to_string))
}

fn resolve_f64(flag: Option<f64>, cfg: &Value, key: &str) -> Option<f64> {
    flag.or_else(|| cfg.get(key).and_then(Value::as_f64))
}

fn resolve_usize(flag: Option<usize>, cfg: &Value, key: &str) -> Option<usize> {
    flag.or_else(|| cfg.get(key).and_then(Value::as_u64).map(|v| v as usize))
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidSpec(format!("missing required argument: {what}")))
}

/// Inline JSON or @path.
fn parse_measure(text: &str) -> Result<MeasureSpec, Error> {
    let body = if let Some(path) = text.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?
    } else {
        text.to_string()
    };
    let v: Value = serde_json::from_str(&body)
        .map_err(|e| Error::InvalidSpec(format!("measure JSON: {e}")))?;
    MeasureSpec::from_json(&v)
}

fn parse_pair(text: &str) -> Result<LevyPair, Error> {
    let body = if let Some(path) = text.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?
    } else {
        text.to_string()
    };
    let v: Value =
        serde_json::from_str(&body).map_err(|e| Error::InvalidSpec(format!("pair JSON: {e}")))?;
    LevyPair::from_json(&v)
}

/// Grid syntax a:b:n → n geometric points from 10^a to 10^b.
fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidSpec(format!(
            "grid \"{text}\", expected a:b:n"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("grid exponent \"{}\"", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("grid exponent \"{}\"", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("grid size \"{}\"", parts[2])))?;
    if n < 2 || b <= a {
        return Err(Error::InvalidSpec(format!("grid \"{text}\" is degenerate")));
    }
    Ok(geometric_grid(a, b, n))
}

fn emit(out: &Option<String>, content: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            fs::write(path, content).map_err(|e| Error::InvalidSpec(format!("writing {path}: {e}")))
        }
    }
}

/// Declared right tail (index, constant) for measures where it is exact.
fn declared_tail(m: &MeasureSpec) -> Option<(f64, f64)> {
    match m {
        MeasureSpec::Pareto { alpha } => Some((*alpha, 1.0)),
        _ => None,
    }
}

// ----------------------------------------------------------------------
// Subcommands
// ----------------------------------------------------------------------

fn cmd_transform(a: TransformArgs) -> Result<(), Error> {
    let cfg = load_config(&a.config)?;
    let measure = parse_measure(&require(
        resolve_str(a.measure, &cfg, "measure"),
        "--measure",
    )?)?;
    let grid = parse_grid(&resolve_str(Some(a.grid), &cfg, "grid").unwrap())?;
    let h = STransformHandle::from_measure(measure)?;
    let mut csv = String::from("x,psi,s\n");
    for &x in &grid {
        let w = h.psi(-1.0 / x)?;
        let s = h.s(-1.0 / x)?;
        csv.push_str(&format!("{x:e},{w:e},{s:e}\n"));
    }
    emit(&a.out, &csv)
}

fn cmd_power(a: PowerArgs) -> Result<(), Error> {
    let cfg = load_config(&a.config)?;
    let measure = parse_measure(&require(
        resolve_str(a.measure, &cfg, "measure"),
        "--measure",
    )?)?;
    let t = require(resolve_f64(a.t, &cfg, "t"), "--t")?;
    let grid = parse_grid(&resolve_str(Some(a.grid), &cfg, "grid").unwrap())?;

    let (alpha, c) = match (
        resolve_f64(a.tail_index, &cfg, "tail_index"),
        resolve_f64(a.tail_constant, &cfg, "tail_constant"),
    ) {
        (Some(i), Some(c)) => (i, c),
        (None, None) => declared_tail(&measure).ok_or_else(|| {
            Error::InvalidSpec(
                "no declared tail for this family; pass --tail-index/--tail-constant".into(),
            )
        })?,
        _ => {
            return Err(Error::InvalidSpec(
                "--tail-index and --tail-constant go together".into(),
            ))
        }
    };
    let m1 = match measure.moment(1.0)? {
        ExtendedMoment::Finite(v) => Some(v),
        ExtendedMoment::Infinite => None,
    };
    let sv = LogPowerSv::constant_fn(c)?;
    let predicted = predict_power_tail(alpha, &sv, t, if alpha >= 1.0 { m1 } else { None })?;

    let h = STransformHandle::from_measure(measure)?;
    let estimated = estimate_tail_from_s(&s_power(&h, t)?, &grid, EstimateMode::Auto)?;

    let report = json!({
        "schema": SCHEMA,
        "t": t,
        "predicted": predicted.to_json(),
        "estimated": estimated.to_json(),
        "index_gap": (predicted.index - estimated.index).abs(),
    });
    emit(
        &a.out,
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )
}

fn cmd_idtail(a: IdtailArgs) -> Result<(), Error> {
    let cfg = load_config(&a.config)?;
    let pair = parse_pair(&require(resolve_str(a.pair, &cfg, "pair"), "--pair")?)?;
    let grid = parse_grid(&resolve_str(Some(a.grid), &cfg, "grid").unwrap())?;

    let (alpha, c) = match (
        resolve_f64(a.sigma_alpha, &cfg, "sigma_alpha"),
        resolve_f64(a.sigma_constant, &cfg, "sigma_constant"),
    ) {
        (Some(i), Some(c)) => (i, c),
        _ => match &pair.interior {
            InteriorSigma::SigmaMin { c, alpha, .. } => (*alpha, *c),
            _ => {
                return Err(Error::InvalidSpec(
                    "declare the σ left tail with --sigma-alpha/--sigma-constant".into(),
                ))
            }
        },
    };
    let predicted = id_tail_predict(
        &pair,
        &SigmaLeftTail {
            alpha,
            sv: LogPowerSv::constant_fn(c)?,
        },
    )?;
    let estimated = estimate_tail_from_s(&pair.handle(), &grid, EstimateMode::Auto)?;
    let report = json!({
        "schema": SCHEMA,
        "sigma_left_tail": { "alpha": alpha, "constant": c },
        "predicted": predicted.to_json(),
        "estimated": estimated.to_json(),
        "index_gap": (predicted.index - estimated.index).abs(),
    });
    emit(
        &a.out,
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )
}

fn cmd_breiman(a: BreimanArgs) -> Result<(), Error> {
    let cfg = load_config(&a.config)?;
    let mu = parse_measure(&require(resolve_str(a.mu, &cfg, "mu"), "--mu")?)?;
    let nu = parse_measure(&require(resolve_str(a.nu, &cfg, "nu"), "--nu")?)?;
    let grid = parse_grid(&resolve_str(Some(a.grid), &cfg, "grid").unwrap())?;

    let (alpha, c) = match (
        resolve_f64(a.mu_tail_index, &cfg, "mu_tail_index"),
        resolve_f64(a.mu_tail_constant, &cfg, "mu_tail_constant"),
    ) {
        (Some(i), Some(c)) => (i, c),
        _ => declared_tail(&mu).ok_or_else(|| {
            Error::InvalidSpec(
                "no declared tail for μ; pass --mu-tail-index/--mu-tail-constant".into(),
            )
        })?,
    };
    let m1_nu = match nu.moment(1.0)? {
        ExtendedMoment::Finite(v) => v,
        ExtendedMoment::Infinite => {
            return Err(Error::RegimeMismatch("m₁(ν) must be finite".into()))
        }
    };
    let predicted = breiman_predict(alpha, c, m1_nu)?;
    let h = s_combine(vec![
        (STransformHandle::from_measure(mu)?, 1.0),
        (STransformHandle::from_measure(nu)?, 1.0),
    ])?;
    let estimated = estimate_tail_from_s(&h, &grid, EstimateMode::Auto)?;
    let report = json!({
        "schema": SCHEMA,
        "m1_nu": m1_nu,
        "predicted": predicted.to_json(),
        "estimated": estimated.to_json(),
        "constant_ratio": estimated.sv.constant() / predicted.sv.constant(),
    });
    emit(
        &a.out,
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )
}

fn cmd_mc(a: McArgs) -> Result<(), Error> {
    let cfg = load_config(&a.config)?;
    let measure = parse_measure(&require(
        resolve_str(a.measure, &cfg, "measure"),
        "--measure",
    )?)?;
    let t = require(resolve_usize(a.t, &cfg, "t"), "--t")?;
    let n = require(resolve_usize(a.n, &cfg, "n"), "--n")?;
    let reps = require(resolve_usize(a.reps, &cfg, "reps"), "--reps")?;
    let seed = a
        .seed
        .or_else(|| cfg.get("seed").and_then(Value::as_u64))
        .ok_or_else(|| Error::InvalidSpec("missing required argument: --seed".into()))?;

    let eig = product_spectrum(&measure, t, n, reps, seed)?;
    if let Some(path) = &a.dump_eigenvalues {
        let mut csv = String::with_capacity(eig.len() * 20);
        for v in &eig {
            csv.push_str(&format!("{v:e}\n"));
        }
        fs::write(path, csv).map_err(|e| Error::InvalidSpec(format!("writing {path}: {e}")))?;
    }
    let k = resolve_usize(a.k, &cfg, "k").unwrap_or_else(|| (eig.len() / 100).max(10));
    let fit = hill_fit(&eig, k)?;

    let predicted = declared_tail(&measure)
        .map(|(alpha, c)| -> Result<Value, Error> {
            let m1 = measure.moment(1.0)?.finite();
            let sv = LogPowerSv::constant_fn(c)?;
            let p = predict_power_tail(alpha, &sv, t as f64, if alpha >= 1.0 { m1 } else { None })?;
            Ok(p.to_json())
        })
        .transpose()?;

    let mean = eig.iter().sum::<f64>() / eig.len() as f64;
    let report = json!({
        "schema": SCHEMA,
        "t": t, "n": n, "reps": reps, "seed": seed, "k": k,
        "hill": { "index": fit.index, "constant": fit.constant },
        "mean_eigenvalue": mean,
        "predicted": predicted,
    });
    emit(
        &a.out,
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )
}

fn cmd_verify(a: VerifyArgs) -> ExitCode {
    match scenarios::run_suite(&a.suite) {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
        Ok(reports) => {
            let all_pass = reports.iter().all(|r| r.passed());
            let rendered: String = if a.json {
                let v: Vec<Value> = reports.iter().map(|r| r.to_json()).collect();
                format!("{}\n", serde_json::to_string_pretty(&json!(v)).unwrap())
            } else {
                reports.iter().map(|r| r.render()).collect()
            };
            if let Err(e) = emit(&a.out, &rendered) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
