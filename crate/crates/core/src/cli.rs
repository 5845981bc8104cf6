//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain or validation failure, 2 usage error.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibration::{fit_power_law, power_law_mu0};
use crate::cohort::{simulate_cohort, simulate_individual, CohortConfig};
use crate::error::{Error, Result};
use crate::expansion::{branching_survival, moran_fixation, BranchingParams, MoranParams};
use crate::incidence::{incidence_approx, incidence_with_delay, IncidenceCurve, Provenance};
use crate::io::{fmt_significant, read_incidence_file, write_cohort, write_incidence, write_trajectories};
use crate::model_spec::{parse_rate_model, parse_success_model};
use crate::rate::{RateModel, SuccessModel};
use crate::selfcheck::{property_checks, run_scenario, Check, SCENARIO_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "oncopoisson", version, about = "One-mutation cancer incidence model")]
struct Cli {
    /// `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability that a single mutation expands.
    Fixation(FixationArgs),
    /// Analytic incidence curve for a power-law incidence I = c t^gamma.
    Incidence(IncidenceArgs),
    /// Monte Carlo cohort simulation.
    Simulate(SimulateArgs),
    /// Log-log power-law fit of an incidence table.
    Fit(FitArgs),
    /// Run the built-in scenario and statistical self-checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExpansionModel {
    Moran,
    Branching,
}

#[derive(Debug, Args)]
struct FixationArgs {
    #[arg(long, value_enum)]
    model: ExpansionModel,
    /// Relative fitness (moran).
    #[arg(long, allow_hyphen_values = true, required_if_eq("model", "moran"), conflicts_with = "p")]
    r: Option<f64>,
    /// Organ cell count (moran).
    #[arg(long, required_if_eq("model", "moran"), conflicts_with = "p")]
    n: Option<u64>,
    /// Division probability (branching).
    #[arg(long, allow_hyphen_values = true, required_if_eq("model", "branching"))]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct IncidenceArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    max_age: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    step: f64,
    /// 1 − exp(−M(t)) (default).
    #[arg(long, conflicts_with = "approx")]
    exact: bool,
    /// Small-M approximation I ≈ M(t).
    #[arg(long)]
    approx: bool,
    /// Total fixation plus detection delay in years (exact curve only).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    delay: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    cohort: u64,
    #[arg(long, allow_hyphen_values = true)]
    horizon: f64,
    #[arg(long)]
    seed: u64,
    /// e.g. `constant:sigma=0.01`, `moran:r=2,n=10`, `branching:p=0.75`
    #[arg(long)]
    sigma_model: String,
    /// e.g. `powerlaw:mu0=6e-6,gamma=3`, `constant:mu=0.02`
    #[arg(long)]
    rate_model: String,
    #[arg(long)]
    out: PathBuf,
    /// Also write every individual's events here.
    #[arg(long)]
    trajectories: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = SCENARIO_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    cohort: u64,
    /// Test hook: corrupt the empirical curve so validation must fail.
    #[arg(long, hide = true)]
    inject_failure: bool,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match apply_config_file(args) {
        Ok(a) => a,
        Err(e) => return report(&e, stderr),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Fixation(a) => run_fixation(&a, stdout),
        Command::Incidence(a) => run_incidence(&a),
        Command::Simulate(a) => run_simulate(&a),
        Command::Fit(a) => run_fit(&a),
        Command::Validate(a) => run_validate(&a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => report(&e, stderr),
    }
}

fn report(e: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    match e {
        Error::Usage(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Expands `--config <path>` into explicit `--key value` flags for every key
/// not already given on the command line.
fn apply_config_file(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_owned());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let given: HashSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_owned())
        .collect();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("{path}:{}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if given.contains(&key) || key == "config" {
            continue;
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_owned());
            }
        }
    }
    Ok(args)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run_fixation(args: &FixationArgs, stdout: &mut dyn Write) -> Result<i32> {
    let sigma = match args.model {
        ExpansionModel::Moran => {
            let (Some(r), Some(n)) = (args.r, args.n) else {
                return Err(Error::Usage("moran needs --r and --n".into()));
            };
            moran_fixation(&MoranParams::new(r, n)?)
        }
        ExpansionModel::Branching => {
            if args.r.is_some() || args.n.is_some() {
                return Err(Error::Usage("branching takes only --p".into()));
            }
            let p = args.p.ok_or_else(|| Error::Usage("branching needs --p".into()))?;
            branching_survival(&BranchingParams::new(p)?)
        }
    };
    writeln!(stdout, "{}", fmt_significant(sigma, 9))?;
    Ok(EXIT_OK)
}

/// Grid 0, step, 2·step, … up to `max_age`.
fn age_grid(max_age: f64, step: f64) -> Result<Vec<f64>> {
    if !(max_age > 0.0) || !max_age.is_finite() {
        return Err(Error::Domain(format!("--max-age must be positive, got {max_age}")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("--step must be positive, got {step}")));
    }
    let count = (max_age / step + 1e-9).floor() as u64;
    Ok((0..=count).map(|k| k as f64 * step).collect())
}

fn run_incidence(args: &IncidenceArgs) -> Result<i32> {
    let mu0 = power_law_mu0(args.c, args.gamma, args.sigma)?;
    let rate = RateModel::power_law(mu0, args.gamma)?;
    let success = SuccessModel::constant(args.sigma)?;
    let ages = age_grid(args.max_age, args.step)?;
    let curve = if args.approx {
        if args.delay != 0.0 {
            return Err(Error::Usage("--delay applies to the exact curve only".into()));
        }
        incidence_approx(&rate, &success, &ages)?
    } else {
        incidence_with_delay(&rate, &success, &ages, args.delay, 0.0)?
    };
    let mut out = create(&args.out)?;
    write_incidence(&curve, &mut out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let rate = parse_rate_model(&args.rate_model)?;
    let success = parse_success_model(&args.sigma_model)?;
    let config = CohortConfig::new(args.cohort, args.horizon, rate, success, args.seed)?;
    let result = simulate_cohort(&config)?;
    let comments = vec![
        format!("oncopoisson {} simulate", env!("CARGO_PKG_VERSION")),
        format!("cohort = {}", config.cohort_size),
        format!("horizon = {}", config.horizon),
        format!("seed = {}", config.master_seed),
        format!("rate-model = {}", config.rate),
        format!("sigma-model = {}", config.success),
        format!("sigma = {}", config.success.eval_success()),
        format!("total_mutations = {}", result.total_mutations),
        format!("total_successes = {}", result.total_successes),
    ];
    let mut out = create(&args.out)?;
    write_cohort(&result, &comments, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.trajectories {
        let trajectories = (0..config.cohort_size)
            .map(|i| simulate_individual(&config, i).map(|t| (i, t)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = create(path)?;
        write_trajectories(trajectories.iter().map(|(i, t)| (*i, t)), &mut out)?;
        out.flush()?;
    }
    Ok(EXIT_OK)
}

fn run_fit(args: &FitArgs) -> Result<i32> {
    let points = read_incidence_file(&args.input)?;
    let mut fit = fit_power_law(&points)?;
    if let Some(sigma) = args.sigma {
        fit = fit.with_sigma(sigma)?;
    }
    let mut out = create(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &fit).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ValidateSummary {
    max_abs_z: f64,
    n_ages_gated: usize,
    pass: bool,
    seed: u64,
    cohort: u64,
    empirical_at_horizon: f64,
    analytic_at_horizon: f64,
    checks: Vec<Check>,
}

fn run_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (result, mut report) = run_scenario(args.cohort, args.seed)?;
    let analytic = result.analytic_curve()?;
    if args.inject_failure {
        let doubled = result
            .empirical_curve
            .values()
            .iter()
            .zip(analytic.values())
            .map(|(v, a)| (2.0 * v).max(2.0 * a).min(1.0))
            .collect();
        let corrupted = IncidenceCurve::new(analytic.ages().to_vec(), doubled, Provenance::Empirical)?;
        report = crate::cohort::validate_curves(&corrupted, &analytic, args.cohort, report.tolerance_sigmas)?;
        // a corrupted run must fail even when no age reaches the gating count
        report.pass = false;
    }
    let checks = property_checks()?;
    let pass = report.pass && checks.iter().all(|c| c.pass);
    let summary = ValidateSummary {
        max_abs_z: report.max_abs_z,
        n_ages_gated: report.n_ages_gated,
        pass,
        seed: args.seed,
        cohort: args.cohort,
        empirical_at_horizon: *result.empirical_curve.values().last().unwrap_or(&0.0),
        analytic_at_horizon: *analytic.values().last().unwrap_or(&0.0),
        checks,
    };
    serde_json::to_writer_pretty(&mut *stdout, &summary).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("oncopoisson").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_includes_endpoint() {
        assert_eq!(age_grid(3.0, 1.0).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(age_grid(1.0, 0.3).unwrap().len(), 4);
        assert!(age_grid(0.0, 1.0).is_err());
        assert!(age_grid(5.0, 0.0).is_err());
    }

    #[test]
    fn fixation_usage_errors() {
        assert_eq!(run_capture(&["fixation", "--model", "moran", "--r", "2"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fixation", "--model", "branching", "--p", "0.7", "--r", "2"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fixation", "--model", "wright"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fixation", "--model", "moran", "--r", "x", "--n", "3"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
    }

    #[test]
    fn fixation_domain_errors() {
        let (code, _, err) = run_capture(&["fixation", "--model", "moran", "--r", "-1", "--n", "3"]);
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.contains("domain"));
        assert_eq!(run_capture(&["fixation", "--model", "branching", "--p", "1.5"]).0, EXIT_FAILURE);
    }

    #[test]
    fn config_file_supplies_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("fix.conf");
        std::fs::write(&cfg, "# branching run\nmodel = branching\np = 0.9\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        let (code, out, _) = run_capture(&["fixation", "--config", cfg]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), fmt_significant(2.0 - 1.0 / 0.9, 9));
        // flags override the file
        let (_, out, _) = run_capture(&["fixation", "--config", cfg, "--p", "0.75"]);
        assert_eq!(out.trim(), "0.666666667");
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }
}
