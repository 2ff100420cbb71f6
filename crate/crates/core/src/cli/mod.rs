//! Command-line front end: `tweezer-gates <experiment> [flags]`.
//!
//! Every run loads a config (the bundled three-ion one by default), applies
//! `--set` overrides, runs one experiment and writes its tables. Failures
//! print a JSON error record on stderr and map to a nonzero exit code.

pub mod config;
pub mod emit;
mod experiments;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use config::{apply_override, from_document, load_document, Experiment, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "tweezer-gates", version, about = "Tweezer-controlled MS gates: modes, dynamics, synthesis, noise")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// Config file (TOML, or JSON by extension). Defaults to the bundled three-ion chain.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `--set chain.light_shift_hz=2e7`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Axial mode spectrum with and without tweezers.
    Modes,
    /// Conditional MS gate traces for each control case.
    Gate,
    /// Multi-tone n-controlled gate synthesis.
    Synth,
    /// Monte-Carlo gate fidelity and decoupling study.
    Noise,
    /// Mode shift versus light shift and beam waist.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Modes => Experiment::Modes,
            Command::Gate => Experiment::Gate,
            Command::Synth => Experiment::Synth,
            Command::Noise => Experiment::Noise,
            Command::Scan => Experiment::Scan,
        }
    }
}

/// What a successful run wrote.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Resolves the final config from the arguments.
pub fn resolve_config(args: &Args) -> Result<RunConfig> {
    let mut doc = load_document(args.config.as_deref())?;
    for o in &args.overrides {
        apply_override(&mut doc, o)?;
    }
    let mut cfg = from_document(doc)?;
    cfg.experiment = args.command.into();
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let format = match (args.format, cfg.output.format, &args.out) {
        (Some(FormatArg::Csv), ..) => Format::Csv,
        (Some(FormatArg::Json), ..) => Format::Json,
        (None, Some(f), _) => f,
        (None, None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => Format::Json,
        _ => Format::Csv,
    };
    cfg.output.format = Some(format);
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.to_string_lossy().into_owned());
    }
    if cfg.output.path.is_none() {
        cfg.output.path = Some(format!("{}.{}", cfg.experiment.name(), format.extension()));
    }
    Ok(cfg)
}

fn metadata(cfg: &RunConfig) -> Result<Value> {
    let echo = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    Ok(json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "config": echo,
    }))
}

/// Runs the configured experiment and writes its tables.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    let outcome = match cfg.experiment {
        Experiment::Modes => experiments::modes(cfg)?,
        Experiment::Gate => experiments::gate(cfg)?,
        Experiment::Synth => experiments::synth(cfg)?,
        Experiment::Noise => experiments::noise(cfg)?,
        Experiment::Scan => experiments::scan(cfg)?,
    };
    let format = cfg.output.format.unwrap_or(Format::Csv);
    let path = cfg.output.path.clone().unwrap_or_else(|| format!("{}.{}", cfg.experiment.name(), format.extension()));
    let files = emit::emit(&outcome.tables, Path::new(&path), format, &metadata(cfg)?)?;
    Ok(RunReport { files, summary: outcome.summary })
}

/// JSON error record printed on stderr.
pub fn error_record(e: &Error) -> Value {
    json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() })
}

/// Parses `argv` and runs without printing. Argument errors become config errors.
pub fn run<I, T>(argv: I) -> Result<RunReport>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| Error::Config(e.to_string()))?;
    execute(&resolve_config(&args)?)
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match resolve_config(&args).and_then(|cfg| execute(&cfg)) {
        Ok(report) => {
            println!("{}", report.summary);
            for f in &report.files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            e.exit_code()
        }
    }
}
