//! Experiment runner around `cwave-core`: reads a JSON configuration, validates it, runs one
//! experiment kind and writes CSV tables, SVG plots and a manifest into the output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod suite;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

use config::{ExperimentConfig, ExperimentKind};
use cwave_core::{Error, ErrorClass};
use experiments::{CheckRow, Status};
use output::{config_hash, Artifacts, Manifest};

#[derive(Debug, Parser)]
#[command(name = "cwave", version, about = "Composite shock/rarefaction wave experiments for u_t + (u^3)_x = mu u_xx")]
pub struct Cli {
    /// JSON configuration; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured experiment kind.
    #[arg(long, value_enum)]
    pub kind: Option<ExperimentKind>,
    /// Overrides the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured wall-clock budget of the theorem suite.
    #[arg(long = "budget-seconds")]
    pub budget_seconds: Option<f64>,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass = 0,
    VerificationFailure = 1,
    ConfigError = 2,
    NumericalError = 3,
}

impl Outcome {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Short label for the failure family of an error.
pub fn failure_label(e: &Error) -> &'static str {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Empty(_) => "config",
        Error::BlowUp { .. } | Error::NonFinite(_) => "blow_up",
        Error::Coverage { .. } => "coverage",
        Error::FitQuality { .. } => "fit_quality",
        Error::Cfl { .. } => "cfl",
        Error::Quadrature { .. } => "quadrature",
        Error::NotBracketed { .. } | Error::NoConvergence { .. } => "root_finding",
        Error::Io(_) => "io",
    }
}

fn outcome_of(e: &Error) -> Outcome {
    match e.class() {
        ErrorClass::Config => Outcome::ConfigError,
        ErrorClass::Numerical | ErrorClass::Io => Outcome::NumericalError,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub class: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub checks: Vec<CheckRow>,
    pub hash: Option<String>,
    pub failure: Option<Failure>,
}

/// Reads the configuration named on the command line (or the defaults), applies the flag
/// overrides and validates the result.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(k) = cli.kind {
        cfg.kind = k;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(b) = cli.budget_seconds {
        cfg.budget_seconds = b;
    }
    cfg.apply_seed();
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Vec<CheckRow>, Error> {
    match cfg.kind {
        ExperimentKind::Profile => experiments::profile(cfg, art),
        ExperimentKind::Rarefaction => experiments::rarefaction(cfg, art),
        ExperimentKind::WeightAlgebra => experiments::weight(cfg, art),
        ExperimentKind::Poincare => experiments::poincare(cfg, art),
        ExperimentKind::Interactions => experiments::interactions(cfg, art),
        ExperimentKind::Evolve => experiments::evolve(cfg, art, None),
        ExperimentKind::TheoremSuite => Ok(suite::theorem_suite(cfg, art)),
    }
}

/// Validates `cfg`, runs it, and writes `checks.csv` and `manifest.json` next to the
/// experiment's own files. Nothing is written when validation fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> RunSummary {
    let hash = match cfg.validate().and_then(|_| config_hash(cfg)) {
        Ok(h) => h,
        Err(e) => {
            return RunSummary {
                outcome: outcome_of(&e),
                checks: Vec::new(),
                hash: None,
                failure: Some(Failure { class: failure_label(&e), message: e.to_string() }),
            }
        }
    };
    let mut art = Artifacts::new(cfg.output_dir.clone(), hash.clone());
    let result = dispatch(cfg, &mut art);
    let (outcome, checks, failure) = match result {
        Ok(rows) => {
            let failed = rows.iter().any(|r| r.status == Status::Fail);
            (if failed { Outcome::VerificationFailure } else { Outcome::Pass }, rows, None)
        }
        Err(e) => (outcome_of(&e), Vec::new(), Some(Failure { class: failure_label(&e), message: e.to_string() })),
    };
    let written = experiments::write_checks(&mut art, "checks.csv", &checks).and_then(|_| {
        #[derive(Serialize)]
        struct Full<'a> {
            #[serde(flatten)]
            manifest: Manifest<'a>,
            failure: &'a Option<Failure>,
        }
        let files = art.files.clone();
        let m = Full {
            manifest: Manifest {
                manifest_sha256: &hash,
                tool: "cwave",
                version: env!("CARGO_PKG_VERSION"),
                kind: cfg.kind.name(),
                status: status_word(outcome),
                exit_code: outcome.code(),
                config: cfg,
                files: &files,
            },
            failure: &failure,
        };
        art.json("manifest.json", &m)
    });
    match written {
        Ok(()) => RunSummary { outcome, checks, hash: Some(hash), failure },
        Err(e) => RunSummary {
            outcome: Outcome::NumericalError,
            checks,
            hash: Some(hash),
            failure: Some(Failure { class: failure_label(&e), message: e.to_string() }),
        },
    }
}

fn status_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::VerificationFailure => "verification_failure",
        Outcome::ConfigError => "config_error",
        Outcome::NumericalError => "numerical_error",
    }
}

pub fn render_table(rows: &[CheckRow]) -> String {
    let w = rows.iter().map(|r| r.id.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<w$}  {:>2}  {:<14}  {:>12}  {}\n", "check", "c", "status", "value", "target");
    for r in rows {
        s.push_str(&format!("{:<w$}  {:>2}  {:<14}  {:>12.5e}  {}\n", r.id, r.criterion, r.status.to_string(), r.value, r.target));
    }
    s
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Outcome::ConfigError.code() } else { 0 };
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return outcome_of(&e).code();
        }
    };
    let summary = run_experiment(&cfg);
    if !summary.checks.is_empty() {
        print!("{}", render_table(&summary.checks));
    }
    if let Some(f) = &summary.failure {
        eprintln!("{} error [{}]: {}", if summary.outcome == Outcome::ConfigError { "configuration" } else { "numerical" }, f.class, f.message);
    }
    if let Some(h) = &summary.hash {
        println!("{}: {} (manifest {h}, output {})", cfg.kind.name(), status_word(summary.outcome), cfg.output_dir.display());
    }
    summary.outcome.code()
}
