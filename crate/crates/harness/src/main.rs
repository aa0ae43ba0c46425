use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyak_harness::{
    execute_config, parse_config, parse_sigma2_config, sigma2_table, summarize_csv, HarnessError,
    Result, Window,
};

/// Deterministic benchmark runner for stochastic Polyak-type optimizers.
#[derive(Parser)]
#[command(name = "polyak", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config whose sections each fix a single method, penalty,
    /// and initial step (seeds may still be a list).
    Run { config: PathBuf },
    /// Execute the full Cartesian grid over `method`, `lambda`, and
    /// `alpha0` in each section.
    Sweep { config: PathBuf },
    /// Collapse a run log: per-seed medians over an epoch window, then
    /// median and spread across seeds per run id.
    Summarize {
        csv: PathBuf,
        /// Inclusive epoch window, e.g. `40:50`.
        #[arg(long)]
        window: String,
    },
    /// Print the interpolation gap of a generated least-squares problem
    /// over a penalty grid.
    Sigma2 { config: PathBuf },
}

fn read_to_string(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn real_main(cli: Cli) -> Result<()> {
    let execute = |config: &PathBuf, single_point: bool| -> Result<()> {
        let sections = parse_config(&read_to_string(config)?)?;
        for (path, rows) in execute_config(&sections, single_point)? {
            println!("wrote {path} ({rows} rows)");
        }
        Ok(())
    };
    match cli.command {
        Command::Run { config } => execute(&config, true),
        Command::Sweep { config } => execute(&config, false),
        Command::Summarize { csv, window } => {
            let window = Window::parse(&window)?;
            let out = summarize_csv(&read_to_string(&csv)?, window)?;
            print!("{out}");
            Ok(())
        }
        Command::Sigma2 { config } => {
            let cfg = parse_sigma2_config(&read_to_string(&config)?)?;
            print!("{}", sigma2_table(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(1),
                HarnessError::Io(_) => ExitCode::from(2),
            }
        }
    }
}
