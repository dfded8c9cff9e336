use std::path::PathBuf;
use std::process::ExitCode;

use algindex::cli::{explain, list_suites, load_scenario, run, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "algindex", version, about = "Exact verification runs over deformation quantization scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a scenario and print or write the report.
    Verify {
        scenario: PathBuf,
        /// Suite to run; repeat for several. Defaults to the scenario's list.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report zero for every timing, for byte-identical reports.
        #[arg(long)]
        no_timings: bool,
    },
    /// Print the identity a check realizes.
    Explain { check: String },
    /// List suites and their checks.
    ListSuites,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> algindex::Result<ExitCode> {
    match Cli::parse().command {
        Command::Verify {
            scenario,
            suites,
            seed,
            out,
            no_timings,
        } => {
            let sc = load_scenario(&scenario)?;
            let opts = RunOptions {
                suites,
                seed,
                timings: !no_timings,
            };
            let report = run(&sc, &opts)?;
            let json = report.to_json();
            match out {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            for s in &report.suites {
                for c in s.checks.iter().filter(|c| c.status != "pass") {
                    eprintln!("{} {}: {}", c.status, c.id, c.residual);
                }
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Explain { check } => {
            println!("{}", explain(&check)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ListSuites => {
            print!("{}", list_suites());
            Ok(ExitCode::SUCCESS)
        }
    }
}
