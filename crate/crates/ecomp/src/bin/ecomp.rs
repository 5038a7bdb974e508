//! Command-line interface: fitting, pmf/moment tables, sampling, and queue
//! simulation for the extended Conway-Maxwell-Poisson distribution.
//!
//! Exit codes: 0 on success, 2 on input or parameter errors, 3 on numerical
//! failure (non-convergence). `ECOMP_MAX_TERMS` overrides the series term
//! budget.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ecomp::fit::{self, FitConfig, FitResult, FrequencyTable, GridSpec, Model};
use ecomp::{ConvergenceConfig, Ecomp, EcompParams, Error, QueueSpec, Sampler};

#[derive(Parser)]
#[command(name = "ecomp", version, about = "Extended Conway-Maxwell-Poisson distribution tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a count,frequency CSV by maximum likelihood
    Fit(FitArgs),
    /// Tabulate pmf, cdf, survival, and hazard up to a maximum count
    Pmf(PmfArgs),
    /// Mean, variance, and factorial moments
    Moments(MomentsArgs),
    /// Draw reproducible random samples
    Sample(SampleArgs),
    /// Simulate the state-dependent queue and compare with the exact and
    /// analytic steady states
    Queue(QueueArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Args)]
struct ParamFlags {
    /// Shape parameter ν > 0
    #[arg(short = 'v', long = "nu")]
    nu: f64,
    /// Rate-like parameter p > 0
    #[arg(short = 'p', long = "p")]
    p: f64,
    /// Factorial exponent α
    #[arg(short = 'a', long = "alpha")]
    alpha: f64,
    /// Pochhammer exponent β
    #[arg(short = 'b', long = "beta")]
    beta: f64,
}

#[derive(Args)]
struct CommonFlags {
    /// Output rendering
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Relative tail tolerance for series truncation
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file of count,frequency rows; a final "T+,f" row is a tail bin
    input: String,
    /// Model to fit
    #[arg(long, default_value = "ecomp")]
    model: String,
    /// Profile grid over the exponents as MIN:MAX:STEP
    #[arg(long)]
    grid: Option<String>,
    /// Inner optimizer starts per grid point
    #[arg(long, default_value_t = 3)]
    multistart: usize,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct PmfArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Largest count to tabulate
    #[arg(long, default_value_t = 20)]
    kmax: u64,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Highest factorial-moment order to report
    #[arg(short = 'r', long = "order", default_value_t = 3)]
    order: u32,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Number of draws
    #[arg(short = 'n', long = "draws", default_value_t = 10)]
    n: usize,
    /// RNG seed (ChaCha8)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct QueueArgs {
    /// Base arrival rate λ
    #[arg(long)]
    lambda: f64,
    /// Base service rate μ
    #[arg(long)]
    mu: f64,
    /// Shape parameter ν > 0
    #[arg(short = 'v', long = "nu")]
    nu: f64,
    /// Arrival pressure exponent β
    #[arg(short = 'b', long = "beta")]
    beta: f64,
    /// Service pressure exponent α
    #[arg(short = 'a', long = "alpha")]
    alpha: f64,
    /// State cap for the exact truncated solve
    #[arg(long)]
    cap: Option<usize>,
    /// Simulation horizon in time units
    #[arg(long, default_value_t = 1e5)]
    horizon: f64,
    /// RNG seed (ChaCha8)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonFlags,
}

/// A finished run: one machine-readable document and one human table.
struct RunReport {
    machine: Value,
    human: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, format) = match run(cli.command) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match format {
        Format::Machine => println!(
            "{}",
            serde_json::to_string_pretty(&report.machine).expect("report serializes")
        ),
        Format::Table => print!("{}", report.human),
    }
    ExitCode::SUCCESS
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameterSpace(_)
        | Error::Domain(_)
        | Error::InvalidTable(_)
        | Error::Parse { .. }
        | Error::DataTooSparse { .. } => 2,
        Error::NonConvergent { .. }
        | Error::StateCapExceeded { .. }
        | Error::NoConvergence
        | Error::DegenerateCells(_) => 3,
    }
}

fn run(cmd: Command) -> Result<(RunReport, Format), Error> {
    let command_echo: String = std::env::args().collect::<Vec<_>>().join(" ");
    match cmd {
        Command::Fit(a) => {
            let fmt = a.common.format;
            cmd_fit(a, command_echo).map(|r| (r, fmt))
        }
        Command::Pmf(a) => {
            let fmt = a.common.format;
            cmd_pmf(a, command_echo).map(|r| (r, fmt))
        }
        Command::Moments(a) => {
            let fmt = a.common.format;
            cmd_moments(a, command_echo).map(|r| (r, fmt))
        }
        Command::Sample(a) => {
            let fmt = a.common.format;
            cmd_sample(a, command_echo).map(|r| (r, fmt))
        }
        Command::Queue(a) => {
            let fmt = a.common.format;
            cmd_queue(a, command_echo).map(|r| (r, fmt))
        }
    }
}

/// Series configuration from the common flags plus the ECOMP_MAX_TERMS
/// environment override.
fn convergence(common: &CommonFlags) -> Result<ConvergenceConfig, Error> {
    let mut cfg = ConvergenceConfig::default();
    if let Some(tol) = common.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("--tol must be in (0, 1), got {tol}")));
        }
        cfg.rel_tol = tol;
    }
    if let Ok(s) = std::env::var("ECOMP_MAX_TERMS") {
        cfg.max_terms = s.parse::<usize>().map_err(|_| {
            Error::Domain(format!("ECOMP_MAX_TERMS must be a positive integer, got '{s}'"))
        })?;
    }
    Ok(cfg)
}

fn dist_from(params: &ParamFlags, common: &CommonFlags) -> Result<Ecomp, Error> {
    let cfg = convergence(common)?;
    Ecomp::with_config(
        EcompParams::new(params.nu, params.p, params.alpha, params.beta)?,
        cfg,
    )
}

/// 64-bit FNV-1a over the raw input bytes, as a hex digest.
fn fnv1a_digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a:{hash:016x}")
}

fn parse_grid(text: &str) -> Result<GridSpec, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!(
            "--grid expects MIN:MAX:STEP, got '{text}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("invalid grid component '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if nums.iter().any(|x| !x.is_finite()) || nums[2] <= 0.0 || nums[1] < nums[0] {
        return Err(Error::Domain(format!("degenerate grid '{text}'")));
    }
    Ok(GridSpec {
        min: nums[0],
        max: nums[1],
        step: nums[2],
    })
}

fn params_json(p: &EcompParams) -> Value {
    json!({ "nu": p.nu(), "p": p.p(), "alpha": p.alpha(), "beta": p.beta() })
}

fn cmd_fit(args: FitArgs, command_echo: String) -> Result<RunReport, Error> {
    let bytes = std::fs::read(&args.input).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", args.input),
    })?;
    let digest = fnv1a_digest(&bytes);
    let table = FrequencyTable::parse(&String::from_utf8_lossy(&bytes))?;
    let model: Model = args.model.parse()?;

    let mut cfg = FitConfig::for_model(model);
    if let Some(g) = &args.grid {
        cfg.grid = parse_grid(g)?;
    }
    cfg.multistart = args.multistart.max(1);
    if let Some(tol) = args.common.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("--tol must be in (0, 1), got {tol}")));
        }
        cfg.convergence.rel_tol = tol;
    }
    if let Ok(s) = std::env::var("ECOMP_MAX_TERMS") {
        cfg.convergence.max_terms = s.parse::<usize>().map_err(|_| {
            Error::Domain(format!("ECOMP_MAX_TERMS must be a positive integer, got '{s}'"))
        })?;
    }

    let result = fit::fit(&table, &cfg).map_err(|e| stage(e, "fit"))?;
    let lr = if model == Model::Ecomp {
        let nb = fit::fit(&table, &FitConfig::for_model(Model::Nb)).map_err(|e| stage(e, "nb fit"))?;
        Some(fit::lr_test_from_fits(&result, &nb))
    } else {
        None
    };

    let mut human = String::new();
    let _ = writeln!(human, "model: {}", model.name());
    let _ = writeln!(human, "input: {} ({digest})", args.input);
    let _ = writeln!(human, "{:>8} {:>10} {:>12}", "count", "observed", "expected");
    for (i, &(count, freq)) in table.cells().iter().enumerate() {
        let _ = writeln!(human, "{count:>8} {freq:>10} {:>12.2}", result.expected[i]);
    }
    if let Some((threshold, freq)) = table.tail() {
        let _ = writeln!(
            human,
            "{:>7}+ {freq:>10} {:>12.2}",
            threshold,
            result.expected.last().unwrap()
        );
    }
    let _ = writeln!(human, "{:>8} {:>10}", "total", table.n());
    let p = &result.params;
    let _ = writeln!(
        human,
        "MLE: nu = {:.4}  p = {:.4}  alpha = {:.4}  beta = {:.4}{}",
        p.nu(),
        p.p(),
        p.alpha(),
        p.beta(),
        if result.at_boundary { "  (boundary)" } else { "" }
    );
    let _ = writeln!(human, "log-likelihood = {:.4}", result.loglik);
    let _ = writeln!(human, "AIC = {:.2}", result.aic);
    let _ = writeln!(
        human,
        "chi-square = {:.2}  df = {}  p-value = {:.4}",
        result.chisq, result.df, result.p_value
    );
    if let Some(lr) = &lr {
        let _ = writeln!(
            human,
            "LR test vs NB: statistic = {:.3}  df = {}  p-value = {:.5}",
            lr.statistic, lr.df, lr.p_value
        );
    }

    let machine = json!({
        "command": command_echo,
        "input_digest": digest,
        "results": fit_json(&result, &table, lr.as_ref()),
    });
    Ok(RunReport { machine, human })
}

fn fit_json(result: &FitResult, table: &FrequencyTable, lr: Option<&fit::LrTest>) -> Value {
    let mut cells: Vec<Value> = table
        .cells()
        .iter()
        .enumerate()
        .map(|(i, &(count, freq))| {
            json!({ "count": count, "observed": freq, "expected": result.expected[i] })
        })
        .collect();
    if let Some((threshold, freq)) = table.tail() {
        cells.push(json!({
            "count": format!("{threshold}+"),
            "observed": freq,
            "expected": result.expected.last().unwrap(),
        }));
    }
    json!({
        "model": result.model.name(),
        "mle": params_json(&result.params),
        "loglik": result.loglik,
        "aic": result.aic,
        "chisq": result.chisq,
        "df": result.df,
        "p_value": result.p_value,
        "converged": result.converged,
        "at_boundary": result.at_boundary,
        "n": table.n(),
        "cells": cells,
        "lr_test_vs_nb": lr.map(|t| json!({
            "statistic": t.statistic, "df": t.df, "p_value": t.p_value
        })),
    })
}

/// Names the stage that raised a numerical failure.
fn stage(e: Error, what: &str) -> Error {
    if matches!(e, Error::NonConvergent { .. } | Error::NoConvergence) {
        eprintln!("stage: {what}");
    }
    e
}

fn cmd_pmf(args: PmfArgs, command_echo: String) -> Result<RunReport, Error> {
    let d = dist_from(&args.params, &args.common)?;
    let mut rows = Vec::new();
    let mut human = String::new();
    let _ = writeln!(
        human,
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "k", "pmf", "cdf", "survival", "hazard"
    );
    let mut cdf = 0.0;
    for k in 0..=args.kmax {
        let pmf = d.pmf(k);
        cdf += pmf;
        let surv = d.survival(k);
        let haz = d.hazard(k);
        let _ = writeln!(
            human,
            "{k:>6} {pmf:>14.8e} {:>14.10} {surv:>14.8e} {haz:>14.8e}",
            cdf.min(1.0)
        );
        rows.push(json!({ "k": k, "pmf": pmf, "cdf": cdf.min(1.0), "survival": surv, "hazard": haz }));
    }
    let machine = json!({
        "command": command_echo,
        "results": {
            "params": params_json(d.params()),
            "normalizer": {
                "log_value": d.log_normalizer().log_value,
                "asymptotic": d.log_normalizer().is_asymptotic(),
            },
            "table": rows,
        }
    });
    Ok(RunReport { machine, human })
}

fn cmd_moments(args: MomentsArgs, command_echo: String) -> Result<RunReport, Error> {
    if args.order < 1 {
        return Err(Error::Domain("--order must be at least 1".into()));
    }
    let d = dist_from(&args.params, &args.common)?;
    let m = d.mean_variance();
    let mut factorial = Vec::new();
    let mut human = String::new();
    let _ = writeln!(
        human,
        "mean = {:.10}  variance = {:.10}{}",
        m.mean,
        m.variance,
        if m.approximate { "  (asymptotic approximation)" } else { "" }
    );
    for r in 1..=args.order {
        let fm = d.factorial_moment(r)?;
        let _ = writeln!(human, "factorial moment r = {r}: {fm:.10}");
        factorial.push(json!({ "r": r, "value": fm }));
    }
    let machine = json!({
        "command": command_echo,
        "results": {
            "params": params_json(d.params()),
            "mean": m.mean,
            "variance": m.variance,
            "approximate": m.approximate,
            "factorial_moments": factorial,
        }
    });
    Ok(RunReport { machine, human })
}

fn cmd_sample(args: SampleArgs, command_echo: String) -> Result<RunReport, Error> {
    let d = dist_from(&args.params, &args.common)?;
    let mut sampler = Sampler::new(d, args.seed);
    let draws = sampler.sample(args.n)?;
    let mut human = String::new();
    for chunk in draws.chunks(20) {
        let line: Vec<String> = chunk.iter().map(u64::to_string).collect();
        let _ = writeln!(human, "{}", line.join(" "));
    }
    let machine = json!({
        "command": command_echo,
        "results": {
            "params": params_json(sampler.dist().params()),
            "seed": args.seed,
            "draws": draws,
        }
    });
    Ok(RunReport { machine, human })
}

fn cmd_queue(args: QueueArgs, command_echo: String) -> Result<RunReport, Error> {
    let cfg = convergence(&args.common)?;
    let spec = QueueSpec::new(args.lambda, args.mu, args.nu, args.alpha, args.beta, args.cap)?;
    let exact = spec.solve_truncated();
    let sim = spec.simulate_ctmc(args.horizon, args.seed)?;
    let analytic = spec.analytic_occupancy(&cfg)?;
    let tv_sim_exact = sim.total_variation(&exact.occupancy);
    let tv_sim_analytic = sim.total_variation(&analytic);
    let tv_exact_analytic = exact.total_variation(&analytic);

    let mut human = String::new();
    let _ = writeln!(
        human,
        "{:>6} {:>14} {:>14} {:>14}",
        "state", "simulated", "exact", "analytic"
    );
    let show = analytic
        .iter()
        .rposition(|&x| x > 1e-10)
        .unwrap_or(0)
        .min(spec.state_cap());
    for k in 0..=show {
        let _ = writeln!(
            human,
            "{k:>6} {:>14.8e} {:>14.8e} {:>14.8e}",
            sim.occupancy.get(k).copied().unwrap_or(0.0),
            exact.occupancy.get(k).copied().unwrap_or(0.0),
            analytic.get(k).copied().unwrap_or(0.0),
        );
    }
    let _ = writeln!(human, "TV(simulated, exact)    = {tv_sim_exact:.6}");
    let _ = writeln!(human, "TV(simulated, analytic) = {tv_sim_analytic:.6}");
    let _ = writeln!(human, "TV(exact, analytic)     = {tv_exact_analytic:.6e}");

    let machine = json!({
        "command": command_echo,
        "results": {
            "lambda": args.lambda,
            "mu": args.mu,
            "params": params_json(&spec.induced_params()),
            "state_cap": spec.state_cap(),
            "horizon": args.horizon,
            "seed": args.seed,
            "simulated": sim.occupancy,
            "exact": exact.occupancy,
            "analytic": analytic,
            "tv_sim_exact": tv_sim_exact,
            "tv_sim_analytic": tv_sim_analytic,
            "tv_exact_analytic": tv_exact_analytic,
        }
    });
    Ok(RunReport { machine, human })
}
