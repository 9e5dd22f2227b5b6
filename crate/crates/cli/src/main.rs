use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nested_mz_cli::report::{self, CoefficientTable};
use nested_mz_cli::{load_scenario, CliError};

#[derive(Debug, Parser)]
#[command(name = "nested-mz", version, about = "Nested Mach-Zehnder quad-cell simulation")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Directory for emitted CSV files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override the simulated duration (time units).
    #[arg(long, global = true)]
    duration: Option<f64>,

    /// Override the sampling rate (samples per time unit).
    #[arg(long, global = true)]
    rate: Option<f64>,

    /// Suppress the report on standard output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate, take the power spectrum, and write the requested tables.
    Run { scenario: String },
    /// Analytic and finite-difference sensitivity coefficients.
    Coeffs { scenario: String },
    /// Beam curves after F and at the detector for the scenario's static tilts.
    Beamcurves { scenario: String },
}

fn execute(args: &Args) -> Result<(), CliError> {
    match &args.command {
        Command::Run { scenario } => {
            let mut parsed = load_scenario(scenario)?;
            report::apply_overrides(&mut parsed.scenario, args.duration, args.rate)?;
            let report = report::run(&parsed, &args.out_dir)?;
            if !args.quiet {
                print!("{report}");
            }
        }
        Command::Coeffs { scenario } => {
            let parsed = load_scenario(scenario)?;
            let coeffs = report::coefficients(&parsed.scenario)?;
            let entry = report::write_coeffs(&coeffs, &args.out_dir)?;
            if !args.quiet {
                print!("{}", CoefficientTable(&coeffs));
                println!("wrote {} ({} rows)", entry.path.display(), entry.rows);
            }
        }
        Command::Beamcurves { scenario } => {
            let parsed = load_scenario(scenario)?;
            let entry = report::write_beamcurves(&parsed.scenario, &args.out_dir)?;
            if !args.quiet {
                println!("wrote {} ({} rows)", entry.path.display(), entry.rows);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
