//! `textkernel` command-line driver.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 data format, 4 verification
//! failure. Errors are printed to stderr as one JSON object.

mod commands;
mod failure;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    bench::Bench, evaluate::Evaluate, gen_labels::GenLabels, loss_check::LossCheck,
    nas_demo::NasDemo, reconstruct::Reconstruct, synth::Synth, upper_bound::UpperBound,
};
use failure::{CliResult, Failure};

#[derive(Debug, Parser)]
#[command(
    name = "textkernel",
    version,
    about = "Text-kernel labels, reconstruction and evaluation"
)]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    GenLabels(GenLabels),
    Reconstruct(Reconstruct),
    Evaluate(Evaluate),
    UpperBound(UpperBound),
    Synth(Synth),
    LossCheck(LossCheck),
    NasDemo(NasDemo),
    Bench(Bench),
}

impl Command {
    fn run(self) -> CliResult<()> {
        match self {
            Command::GenLabels(c) => c.run(),
            Command::Reconstruct(c) => c.run(),
            Command::Evaluate(c) => c.run(),
            Command::UpperBound(c) => c.run(),
            Command::Synth(c) => c.run(),
            Command::LossCheck(c) => c.run(),
            Command::NasDemo(c) => c.run(),
            Command::Bench(c) => c.run(),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} worker threads: {e}", cli.threads)))?;
    pool.install(|| cli.command.run())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.kind().to_string();
            let _ = e.print();
            eprintln!("{}", Failure::Usage(message).to_json());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.category().exit_code() as u8)
        }
    }
}
