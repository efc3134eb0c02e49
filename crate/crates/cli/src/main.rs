//! `bandgap` command line: run one experiment described by a JSON
//! configuration file.
//!
//! Usage: `bandgap <subcommand> --config <path> [--out <dir>] [--threads N]`.
//! Subcommands mirror the `experiment` kinds; the config's `experiment` field
//! must agree with the chosen subcommand. Exit codes: 0 on success, 2 for
//! configuration errors, 3 for numerical failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use bandgap::config::{parse_config, CliError, ExperimentKind};
use bandgap::experiments::run;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bandgap",
    version,
    about = "Spectral bands and gaps of periodic manifolds",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: `path` from the config, else the current
    /// directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Cap the computation thread count.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Floquet band sweep and gap report for one period cell.
    #[command(name = "bands")]
    Bands(RunArgs),
    /// Band widths and limit distances over a list of deformation sizes.
    #[command(name = "convergence")]
    Convergence(RunArgs),
    /// Exact band/gap structure of the two-dimensional limit model.
    #[command(name = "limit2d")]
    Limit2d(RunArgs),
    /// Reference dispersion plot (L = 0.5, r = 1/13): six branches of sqrt(lambda).
    #[command(name = "figure3")]
    Figure3(RunArgs),
    /// Closed-form certificate for m gaps of the limit model.
    #[command(name = "certificate")]
    Certificate(RunArgs),
    /// Sectional-curvature profile of a period cell.
    #[command(name = "curvature")]
    Curvature(RunArgs),
    /// Isoperimetric lower-bound diagnostic from the thinnest slice.
    #[command(name = "isoperimetric")]
    Isoperimetric(RunArgs),
    /// Randomized eigenvalue-comparison self-test.
    #[command(name = "minmax-selftest")]
    MinmaxSelftest(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Bands(_) => ExperimentKind::Bands,
            Command::Convergence(_) => ExperimentKind::Convergence,
            Command::Limit2d(_) => ExperimentKind::Limit2d,
            Command::Figure3(_) => ExperimentKind::Figure3,
            Command::Certificate(_) => ExperimentKind::Certificate,
            Command::Curvature(_) => ExperimentKind::Curvature,
            Command::Isoperimetric(_) => ExperimentKind::Isoperimetric,
            Command::MinmaxSelftest(_) => ExperimentKind::MinmaxSelftest,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Bands(args)
            | Command::Convergence(args)
            | Command::Limit2d(args)
            | Command::Figure3(args)
            | Command::Certificate(args)
            | Command::Curvature(args)
            | Command::Isoperimetric(args)
            | Command::MinmaxSelftest(args) => args,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let args = cli.command.args();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let expected = cli.command.kind();
    if config.experiment != expected {
        return Err(CliError::Config(format!(
            "config.experiment: `{}` does not match subcommand `{}`",
            config.experiment.name(),
            expected.name()
        )));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let files = run(&config, &out_dir)?;
    for file in &files {
        println!("wrote {}", file.display());
    }
    Ok(())
}
