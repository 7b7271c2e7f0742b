//! Command-line surface: level sets, Clark measures, unitary pairs, the
//! verification pipeline, and joint-spectrum scans.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/config error,
//! 3 every requested alpha was exceptional.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CommandError;
use config::{Options, RunConfig};

#[derive(Parser)]
#[command(
    name = "bidisk-clark",
    version,
    about = "Clark measures, model-space unitaries and Taylor joint spectra \
             for rational inner functions on the bidisk"
)]
struct Cli {
    /// TOML config file mirroring the flags (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// function source: bundled name (zw | fave | blaschke2), a JSON file
    /// path, or inline JSON
    #[arg(long, global = true)]
    rif: Option<String>,

    /// comma list of alpha angles in radians (alpha = e^{i angle})
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// quadrature nodes per circle (power of two, >= 64)
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// truncation degree D of the model-space box
    #[arg(long, global = true)]
    degree: Option<usize>,

    /// boundary sampling grid G (power of two, >= 2 D + 2)
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// joint-spectrum scan resolution per axis
    #[arg(long, global = true)]
    scan: Option<usize>,

    /// tolerance profile: strict (smooth) or singular
    #[arg(long = "tol-profile", global = true)]
    tol_profile: Option<String>,

    /// output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// output format for point clouds: csv or json
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export level-set point clouds, one file per alpha
    Levelset,
    /// Export Clark measure quadratures, one file per alpha
    Measure,
    /// Export the Clark unitary pair for the first generic alpha
    Unitary,
    /// Run the verification pipeline and write a report
    Verify,
    /// Scan the joint spectrum and compare with the level set
    Spectrum,
    /// Print a bundled function as interchange JSON
    Example {
        /// zw | fave | blaschke2
        name: String,
    },
}

fn flag_options(cli: &Cli) -> Options {
    Options {
        rif: cli.rif.clone(),
        alpha: cli.alpha.clone(),
        nodes: cli.nodes,
        degree: cli.degree,
        grid: cli.grid,
        scan: cli.scan,
        tol_profile: cli.tol_profile.clone(),
        out: cli.out.clone(),
        format: cli.format.clone(),
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    if let Command::Example { name } = &cli.command {
        return commands::cmd_example(name);
    }
    let mut options = Options::default();
    if let Some(path) = &cli.config {
        options = options.overridden_by(config::load_file(path)?);
    }
    options = options.overridden_by(flag_options(&cli));
    let config = RunConfig::resolve(options)?;
    match cli.command {
        Command::Levelset => commands::cmd_levelset(&config),
        Command::Measure => commands::cmd_measure(&config),
        Command::Unitary => commands::cmd_unitary(&config),
        Command::Verify => commands::cmd_verify(&config),
        Command::Spectrum => commands::cmd_spectrum(&config),
        Command::Example { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CommandError::Verify(failure)) => {
            eprintln!("verification failed: {}", failure.0);
            ExitCode::from(1)
        }
        Err(CommandError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CommandError::Exceptional) => {
            eprintln!("error: every requested alpha value is exceptional for this function");
            ExitCode::from(3)
        }
    }
}
