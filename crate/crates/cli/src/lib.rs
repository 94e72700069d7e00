//! Command-line front end: `optomech <subcommand> --config run.toml`.
//!
//! Exit status is 0 on success, 1 on any error and 2 when `--strict` is set
//! and a constraint flag failed.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, ModelName, RunConfig, Target};
use crate::output::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("unit: {0}")]
    Unit(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] optomech::Error),
}

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Optomechanical entanglement numerics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// override any config scalar, e.g. `--set beta=200` or `--set params.temperature="20 mK"`
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
    /// write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// exit with status 2 when a constraint flag fails
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// joint homodyne/position sign statistics
    Correlations,
    /// interference visibility after position readout
    Visibility,
    /// visibility loss against the number of half periods
    Decay {
        /// restrict to these models (repeatable)
        #[arg(long, value_enum)]
        model: Vec<ModelName>,
        #[arg(long)]
        n_max: Option<u32>,
        /// also evaluate the exact channel (X-space route)
        #[arg(long)]
        channel: bool,
    },
    /// optomechanical entanglement witness
    Witness,
    /// device-design report and constraint flags
    Feasibility,
    /// evaluate a subcommand over the `[sweep]` grid
    Sweep {
        /// analysis to run at each point; defaults to `sweep.target`
        #[arg(long, value_enum)]
        target: Option<Target>,
        #[arg(long, value_enum)]
        model: Vec<ModelName>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        channel: bool,
    },
    /// cross-check the engine against the truncated-Fock oracle
    Validate {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        fock_cutoff: Option<usize>,
    },
}

fn apply_decay_flags(cfg: &mut RunConfig, model: &[ModelName], n_max: Option<u32>) -> Result<(), CliError> {
    if !model.is_empty() {
        cfg.models = model.to_vec();
    }
    if let Some(n) = n_max {
        if n == 0 {
            return Err(CliError::Config("--n-max must be >= 1".into()));
        }
        cfg.n_max = n;
    }
    Ok(())
}

/// Load the config, run the subcommand and return the report and format.
pub fn execute(cli: &Cli) -> Result<(Report, RunConfig), CliError> {
    let g = &cli.global;
    let mut cfg = config::load(g.config.as_deref(), &g.overrides)?;
    if let Some(f) = g.format {
        cfg.output.format = f;
    }
    if let Some(p) = &g.output {
        cfg.output.path = Some(p.clone());
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let report = match &cli.command {
        Command::Correlations => commands::correlations_report(&cfg)?,
        Command::Visibility => commands::visibility_report(&cfg)?,
        Command::Decay { model, n_max, channel } => {
            apply_decay_flags(&mut cfg, model, *n_max)?;
            commands::decay_report(&cfg, *channel)?
        }
        Command::Witness => commands::witness_report(&cfg)?,
        Command::Feasibility => commands::feasibility_report(&cfg)?,
        Command::Sweep {
            target,
            model,
            n_max,
            channel,
        } => {
            apply_decay_flags(&mut cfg, model, *n_max)?;
            let target = target
                .or(cfg.sweep.as_ref().and_then(|s| s.target))
                .ok_or_else(|| CliError::Config("sweep needs --target or `sweep.target`".into()))?;
            commands::sweep_report(&cfg, target, *channel)?
        }
        Command::Validate { beta, fock_cutoff } => {
            if let Some(b) = beta {
                cfg.params.beta = *b;
            }
            if let Some(n) = fock_cutoff {
                cfg.oracle.fock_cutoff = *n;
            }
            cfg.params.validate()?;
            commands::validate_report(&cfg)?
        }
    };
    Ok((report, cfg))
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = report.encode(cfg.output.format)?;
    match &cfg.output.path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Parse `args`, run, write the output and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|(report, cfg)| {
        for w in cfg.params.warnings() {
            eprintln!("warning: {w}");
        }
        emit(&report, &cfg).map(|_| report.constraint_failed)
    });
    match result {
        Ok(true) if cli.global.strict => {
            eprintln!("constraint check failed");
            2
        }
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
