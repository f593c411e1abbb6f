use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subspace_fft::cli::{cmd_compare, cmd_contours, cmd_selftest, cmd_solve};

#[derive(Parser)]
#[command(name = "subfft", version, about = "FFT homogenization with substituted iterations")]
struct Cli {
    /// Replace a config value, e.g. `scheme.tol=1e-10` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme and write its history and result.
    Solve { config: PathBuf },
    /// Run the schemes listed in `scheme.compare` side by side.
    Compare { config: PathBuf },
    /// Sample the predicted rate over a window of complex conductivities.
    Contours { config: PathBuf },
    /// Check the algebraic and operator invariants.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve { config } => cmd_solve(config, &cli.overrides),
        Command::Compare { config } => cmd_compare(config, &cli.overrides),
        Command::Contours { config } => cmd_contours(config, &cli.overrides),
        Command::Selftest => Ok(cmd_selftest()),
    };
    match outcome {
        Ok(o) => {
            print!("{}", o.report);
            for a in &o.artifacts {
                println!("wrote {}", a.display());
            }
            if o.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
