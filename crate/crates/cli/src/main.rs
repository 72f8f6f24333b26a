//! `bundlecurv`: fatness audits, zero-plane certificates, curvature scans and
//! `Φ_t` sweeps for homogeneous bundle metrics.

mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bundlecurv::search::{self, SweepOptions};
use bundlecurv::Error;
use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("refused: {0}")]
    Refusal(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Refusal(_) => 3,
            CliError::Core(e) => match e {
                Error::ConvergenceFailure { .. } | Error::GenericityUnreachable { .. } => 2,
                Error::NoWitness { .. } | Error::NotApplicable(_) | Error::UnsupportedConfiguration(_) => 3,
                _ => 1,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bundlecurv", version, about = "Curvature of homogeneous bundle metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy)]
enum CommandKind {
    Fatness,
    Certify,
    Scan,
    Sweep,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.path`; stdout when neither is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fatness deficit and, for non-fat bundles, a commuting witness pair.
    Fatness(CommonArgs),
    /// Zero-plane certificates along the eps schedule (non-fat bundles only).
    Certify(CommonArgs),
    /// Curvature floor and histogram over random base points and planes.
    Scan(CommonArgs),
    /// Curvature floor and positive fraction along a `Φ_t` grid.
    Sweep(CommonArgs),
}

impl Command {
    fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Fatness(a) => (CommandKind::Fatness, a),
            Command::Certify(a) => (CommandKind::Certify, a),
            Command::Scan(a) => (CommandKind::Scan, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
        }
    }
}

fn run(kind: CommandKind, args: CommonArgs) -> Result<(), CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    if let Some(format) = args.format {
        config.output.format = Some(format);
    }
    let triple = config.build_triple()?;
    let metric = config.build_metric(&triple)?;
    let seed = config.run.seed;

    let text = match kind {
        CommandKind::Fatness => {
            let report = triple.fatness_deficit(seed)?;
            report::fatness(&config, &triple, &report, config.output.format.unwrap_or(Format::Json))
        }
        CommandKind::Certify => {
            if config.run.eps.is_empty() && !config.run.exact {
                return Err(CliError::Config("run.eps: empty schedule and run.exact = false".into()));
            }
            if let Some(e) = config.run.eps.iter().find(|&&e| !(e > 0.0)) {
                return Err(CliError::Config(format!("run.eps: entries must be positive, found {e}")));
            }
            let fatness = triple.fatness_deficit(seed)?;
            if fatness.fat {
                return Err(CliError::Refusal(format!(
                    "the bundle is fat (deficit {} > {}), so no zero-curvature plane is predicted",
                    fatness.deficit,
                    bundlecurv::bundle::FAT_THRESHOLD
                )));
            }
            let mut certs = Vec::new();
            if config.run.exact {
                certs.push(search::certify_exact(&triple, &metric, seed)?);
            }
            certs.extend(search::certify_schedule(&triple, &metric, &config.run.eps, seed)?);
            report::certify(&config, &fatness, &certs, config.output.format.unwrap_or(Format::Json))
        }
        CommandKind::Scan => {
            if config.run.samples == 0 {
                return Err(CliError::Config("run.samples: must be at least 1".into()));
            }
            let scan = search::min_curvature_scan(&triple, &metric, config.run.samples, seed)?;
            report::scan(&config, &scan, config.output.format.unwrap_or(Format::Csv))
        }
        CommandKind::Sweep => {
            if config.run.t_grid.is_empty() {
                return Err(CliError::Config("run.t_grid: must not be empty".into()));
            }
            if let Some(t) = config.run.t_grid.iter().find(|t| !(0.0..1.0).contains(*t)) {
                return Err(CliError::Config(format!("run.t_grid: t = {t} outside [0, 1) gives a degenerate metric")));
            }
            let opts = SweepOptions {
                base_points: config.run.base_points,
                planes_per_point: config.run.planes_per_point,
                inject_certificate: config.run.inject_certificate,
            };
            let rows = search::variation_sweep(&triple, &config.run.t_grid, &opts, seed)?;
            report::sweep(&config, &rows, config.output.format.unwrap_or(Format::Csv))
        }
    };

    match &config.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bundlecurv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
