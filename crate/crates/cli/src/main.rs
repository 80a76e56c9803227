//! Command-line front end for the exact learning-curve engine.
//!
//! Subcommands: `curve` (exact curve plus infinite-sample limit), `check`
//! (monotonicity scan), `lemma` (two-point margin test), `find-q`
//! (counterexample search), `reproduce` (built-in experiment presets).
//!
//! Exit codes: 0 success, 1 configuration error, 2 engine error, 3 fit error.
//! `MONOTONE_LAB_THREADS` caps engine parallelism.

mod config;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use config::ExperimentConfig;
use monotone_lab_core::presets::Figure;
use monotone_lab_core::{
    find_counterexample_q, population_erm, population_risk, two_point_report, DataPoint, Engine,
    Error as CoreError, LearnerSpec, LossKind, McEstimate, MonotonicityReport, NRange, SpdMatrix,
    TwoPointInstance,
};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "monotone-lab",
    version,
    about = "Exact learning curves and risk-monotonicity checks for finite-support distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the exact learning curve and the infinite-sample limit risk.
    Curve {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Override the configured range start.
        #[arg(long)]
        n_start: Option<u32>,
        /// Override the configured range end.
        #[arg(long)]
        n_end: Option<u32>,
        /// Attach Monte Carlo estimate columns with this many replicates.
        #[arg(long)]
        mc_replicates: Option<u64>,
        /// Seed for the Monte Carlo estimates (per-n seeds derive as seed + n).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Scan risk deltas over a range and report monotonicity violations.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Violation tolerance on deltas (defaults to the configured value).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        n_start: Option<u32>,
        #[arg(long)]
        n_end: Option<u32>,
    },
    /// Two-point margin test: fit on all-b and one-a samples of size n and
    /// print the margin certifying local nonmonotonicity when positive.
    Lemma {
        /// Point a: comma-separated coordinates; supervised learners read the
        /// last value as the label y.
        #[arg(long)]
        a: String,
        /// Point b, same format as a.
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        learner: LearnerName,
        /// Defaults to the loss the learner optimizes.
        #[arg(long, value_enum)]
        loss: Option<LossName>,
        /// Also search for a mixing probability with a positive exact delta.
        #[arg(long)]
        find_q: bool,
    },
    /// Search the q grid for a distribution {a: q, b: 1-q} whose exact risk
    /// delta at n is positive.
    FindQ {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        learner: LearnerName,
        #[arg(long, value_enum)]
        loss: Option<LossName>,
    },
    /// Write the built-in experiment curves (CSV) and a violation summary.
    Reproduce {
        /// One of: fig1a, fig1b, fig1c, fig1d.
        figure: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        n_start: Option<u32>,
        #[arg(long)]
        n_end: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerName {
    LinearSquared,
    LinearAbsolute,
    LinearHinge,
    GaussianMean,
    GaussianVariance,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossName {
    Squared,
    Absolute,
    Hinge,
    ZeroOne,
    NllGaussianMean,
    NllGaussianVariance,
    Mahalanobis,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Engine(String),
    Fit(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Engine(_) => 2,
            CliError::Fit(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Engine(m) => write!(f, "engine error: {m}"),
            CliError::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

// Errors raised while computing (not while building the configuration).
fn runtime_err(e: CoreError) -> CliError {
    match e {
        CoreError::Fit(_) => CliError::Fit(e.to_string()),
        other => CliError::Engine(other.to_string()),
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn main() {
    monotone_lab_core::init_parallelism_from_env();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Curve {
            config,
            out,
            format,
            n_start,
            n_end,
            mc_replicates,
            seed,
        } => cmd_curve(&config, &out, format, n_start, n_end, mc_replicates, seed),
        Command::Check {
            config,
            out,
            tol,
            n_start,
            n_end,
        } => cmd_check(&config, &out, tol, n_start, n_end),
        Command::Lemma {
            a,
            b,
            n,
            learner,
            loss,
            find_q,
        } => cmd_lemma(&a, &b, n, learner, loss, find_q),
        Command::FindQ {
            a,
            b,
            n,
            learner,
            loss,
        } => cmd_find_q(&a, &b, n, learner, loss),
        Command::Reproduce {
            figure,
            out_dir,
            n_start,
            n_end,
        } => cmd_reproduce(&figure, &out_dir, n_start, n_end),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn effective_range(
    config: &ExperimentConfig,
    n_start: Option<u32>,
    n_end: Option<u32>,
) -> Result<NRange, CliError> {
    NRange::new(
        n_start.unwrap_or(config.n_range.start),
        n_end.unwrap_or(config.n_range.end),
    )
    .map_err(config_err)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Engine(format!("cannot write {}: {e}", path.display())))
}

fn cmd_curve(
    config_path: &Path,
    out: &Path,
    format: Format,
    n_start: Option<u32>,
    n_end: Option<u32>,
    mc_replicates: Option<u64>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let range = effective_range(&config, n_start, n_end)?;
    let engine = config.engine();
    let curve = engine
        .learning_curve(&config.learner, &config.distribution, &config.loss, range)
        .map_err(runtime_err)?;
    let limit_hypothesis =
        population_erm(&config.learner, &config.distribution).map_err(runtime_err)?;
    let limit_risk = population_risk(&config.distribution, &limit_hypothesis, &config.loss)
        .map_err(runtime_err)?;
    let mc = mc_settings(&config, mc_replicates, seed);
    let estimates: Option<Vec<McEstimate>> = match mc {
        None => None,
        Some((replicates, base_seed)) => Some(
            range
                .iter()
                .map(|n| {
                    engine
                        .mc_expected_risk(
                            &config.learner,
                            &config.distribution,
                            &config.loss,
                            n,
                            replicates,
                            base_seed.wrapping_add(n as u64),
                        )
                        .map_err(runtime_err)
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let contents = match format {
        Format::Csv => output::curve_csv(&curve, limit_risk, estimates.as_deref()),
        Format::Json => output::curve_json(&curve, limit_risk, estimates.as_deref()),
    };
    write_file(out, &contents)
}

fn mc_settings(
    config: &ExperimentConfig,
    mc_replicates: Option<u64>,
    seed: Option<u64>,
) -> Option<(u64, u64)> {
    match (mc_replicates, &config.monte_carlo) {
        (Some(r), mc) => Some((r, seed.or(mc.as_ref().map(|m| m.seed)).unwrap_or(0))),
        (None, Some(mc)) => Some((mc.replicates, seed.unwrap_or(mc.seed))),
        (None, None) => None,
    }
}

fn cmd_check(
    config_path: &Path,
    out: &Path,
    tol: Option<f64>,
    n_start: Option<u32>,
    n_end: Option<u32>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let range = effective_range(&config, n_start, n_end)?;
    let tolerance = tol.unwrap_or(config.tolerance);
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(CliError::Config(format!(
            "tolerance must be finite and >= 0, got {tolerance}"
        )));
    }
    let report = monotone_lab_core::scan(
        &config.engine(),
        &config.learner,
        &config.distribution,
        &config.loss,
        range,
        tolerance,
    )
    .map_err(runtime_err)?;
    let doc = output::CheckDoc {
        schema_version: config::SCHEMA_VERSION,
        learner: &config.learner,
        loss: &config.loss,
        distribution_digest: config.distribution.digest(),
        report: &report,
    };
    write_file(out, &output::to_pretty_json(&doc))
}

fn parse_point(text: &str, labeled: bool) -> Result<DataPoint, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("cannot parse point '{text}': {e}")))?;
    if values.is_empty() {
        return Err(CliError::Config(format!("empty point '{text}'")));
    }
    if labeled {
        if values.len() < 2 {
            return Err(CliError::Config(format!(
                "supervised point '{text}' needs at least an input and a label"
            )));
        }
        let (x, y) = values.split_at(values.len() - 1);
        Ok(DataPoint::labeled(x.to_vec(), y[0]))
    } else {
        Ok(DataPoint::vector(values))
    }
}

fn build_instance(
    a: &str,
    b: &str,
    n: u32,
    learner: LearnerName,
    loss: Option<LossName>,
) -> Result<TwoPointInstance, CliError> {
    let labeled = matches!(
        learner,
        LearnerName::LinearSquared | LearnerName::LinearAbsolute | LearnerName::LinearHinge
    );
    let a = parse_point(a, labeled)?;
    let b = parse_point(b, labeled)?;
    let dim = a.input_dim();
    let learner_spec = match learner {
        LearnerName::LinearSquared => LearnerSpec::LinearSquared {
            intercept: false,
            ridge_lambda0: 0.0,
        },
        LearnerName::LinearAbsolute => LearnerSpec::LinearAbsolute,
        LearnerName::LinearHinge => LearnerSpec::LinearHinge,
        LearnerName::GaussianMean => LearnerSpec::GaussianMeanMle {
            sigma: SpdMatrix::identity(dim),
        },
        LearnerName::GaussianVariance => LearnerSpec::GaussianVarianceMle,
    };
    let loss_kind = match loss {
        Some(name) => loss_from_name(name, dim),
        None => default_loss(learner, dim),
    };
    TwoPointInstance::new(a, b, n, learner_spec, loss_kind).map_err(config_err)
}

fn default_loss(learner: LearnerName, dim: usize) -> LossKind {
    match learner {
        LearnerName::LinearSquared => LossKind::Squared,
        LearnerName::LinearAbsolute => LossKind::Absolute,
        LearnerName::LinearHinge => LossKind::Hinge,
        LearnerName::GaussianMean => LossKind::NllGaussianMean {
            sigma: SpdMatrix::identity(dim),
        },
        LearnerName::GaussianVariance => LossKind::NllGaussianVariance,
    }
}

fn loss_from_name(name: LossName, dim: usize) -> LossKind {
    match name {
        LossName::Squared => LossKind::Squared,
        LossName::Absolute => LossKind::Absolute,
        LossName::Hinge => LossKind::Hinge,
        LossName::ZeroOne => LossKind::ZeroOne,
        LossName::NllGaussianMean => LossKind::NllGaussianMean {
            sigma: SpdMatrix::identity(dim),
        },
        LossName::NllGaussianVariance => LossKind::NllGaussianVariance,
        LossName::Mahalanobis => {
            let mut rows = vec![vec![0.0; dim]; dim];
            for (i, row) in rows.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            LossKind::Mahalanobis {
                sigma: monotone_lab_core::PsdMatrix::new(rows).expect("identity is PSD"),
            }
        }
    }
}

fn cmd_lemma(
    a: &str,
    b: &str,
    n: u32,
    learner: LearnerName,
    loss: Option<LossName>,
    find_q: bool,
) -> Result<(), CliError> {
    let inst = build_instance(a, b, n, learner, loss)?;
    let report = two_point_report(&inst).map_err(runtime_err)?;
    let mut doc = json!({
        "schema_version": config::SCHEMA_VERSION,
        "n": report.n,
        "margin": report.margin,
        "not_locally_monotone": report.margin > 0.0,
        "learning_rate_ratio": report.learning_rate_ratio,
        "hypotheses": {
            "pure_b": report.h_pure_b,
            "mixed": report.h_mixed,
            "mixed_prev": report.h_mixed_prev,
        },
        "losses_at_b": {
            "pure_b": report.loss_b_pure,
            "mixed": report.loss_b_mixed,
            "mixed_prev": report.loss_b_mixed_prev,
        },
    });
    if find_q {
        let found = find_counterexample_q(&Engine::default(), &inst).map_err(runtime_err)?;
        doc["counterexample"] = serde_json::to_value(found).expect("serializable");
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    Ok(())
}

fn cmd_find_q(
    a: &str,
    b: &str,
    n: u32,
    learner: LearnerName,
    loss: Option<LossName>,
) -> Result<(), CliError> {
    let inst = build_instance(a, b, n, learner, loss)?;
    let margin = monotone_lab_core::two_point_margin(&inst).map_err(runtime_err)?;
    let found = find_counterexample_q(&Engine::default(), &inst).map_err(runtime_err)?;
    let doc = json!({
        "schema_version": config::SCHEMA_VERSION,
        "n": n,
        "margin": margin,
        "found": found.is_some(),
        "counterexample": found,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    Ok(())
}

fn cmd_reproduce(
    figure: &str,
    out_dir: &Path,
    n_start: Option<u32>,
    n_end: Option<u32>,
) -> Result<(), CliError> {
    let figure = Figure::parse(figure).ok_or_else(|| {
        CliError::Config(format!(
            "unknown figure '{figure}' (expected one of fig1a, fig1b, fig1c, fig1d)"
        ))
    })?;
    let default = Figure::default_range();
    let range = NRange::new(
        n_start.unwrap_or(default.start),
        n_end.unwrap_or(default.end),
    )
    .map_err(config_err)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Engine(format!("cannot create {}: {e}", out_dir.display())))?;
    let engine = Engine::default();
    let mut summaries = Vec::new();
    for preset in figure.curves() {
        let curve = engine
            .learning_curve(&preset.learner, &preset.distribution, &preset.loss, range)
            .map_err(runtime_err)?;
        let limit_hypothesis =
            population_erm(&preset.learner, &preset.distribution).map_err(runtime_err)?;
        let limit_risk = population_risk(&preset.distribution, &limit_hypothesis, &preset.loss)
            .map_err(runtime_err)?;
        let csv_name = format!("{}.csv", preset.name);
        write_file(
            &out_dir.join(&csv_name),
            &output::curve_csv(&curve, limit_risk, None),
        )?;
        // Violations derived from consecutive entries of the emitted curve.
        let report =
            MonotonicityReport::from_curve(&curve, monotone_lab_core::DEFAULT_DELTA_TOLERANCE)
                .map_err(runtime_err)?;
        summaries.push(json!({
            "name": preset.name,
            "csv": csv_name,
            "limit_risk": limit_risk,
            "verdict": report.verdict,
            "violations": report.violations,
        }));
    }
    let summary = json!({
        "schema_version": config::SCHEMA_VERSION,
        "figure": figure.id(),
        "n_start": range.start,
        "n_end": range.end,
        "curves": summaries,
    });
    write_file(
        &out_dir.join("summary.json"),
        &output::to_pretty_json(&summary),
    )
}
