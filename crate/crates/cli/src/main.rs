use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use alache_bench::{
    fork_join, interrupt_latency, live_count, write_csv, BenchReport, MIN_INTERRUPT_ITERS,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "alache-bench",
    version,
    about = "Interrupt and fork/join latency benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fast-path interrupt vs. full-call interrupt on fresh running futures.
    Interrupt {
        #[arg(long, value_parser = clap::value_parser!(u64).range(MIN_INTERRUPT_ITERS..))]
        iters: u64,
        /// Also write the CSV report to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fork, get and free immediately-completing futures.
    Forkjoin {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        iters: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn emit(reports: &[BenchReport], csv: Option<PathBuf>) -> Result<(), alache_bench::BenchError> {
    write_csv(io::stdout().lock(), reports)?;
    if let Some(path) = csv {
        write_csv(File::create(path)?, reports)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Interrupt { iters, csv } => {
            interrupt_latency(iters).and_then(|reports| emit(&reports, csv))
        }
        Command::Forkjoin { iters, csv } => fork_join(iters).and_then(|r| emit(&[r], csv)),
    };
    match result {
        Ok(()) => {
            eprintln!("live handles after run: {}", live_count());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("alache-bench: {e}");
            ExitCode::FAILURE
        }
    }
}
