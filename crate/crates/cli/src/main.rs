//! `freqlab`: reproducible experiments on repeated quantum measurements.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;

use output::{report_error, Format, Run};

#[derive(Debug, Parser)]
#[command(name = "freqlab", version, about = "Frequency-operator experiments")]
struct Cli {
    /// Master seed; required by stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finkelstein–Hartle residual over a sweep of copy counts.
    FhConverge(commands::FhArgs),
    /// Largest overlap of the repetition state with a frequency subspace.
    Squires(commands::SquiresArgs),
    /// Strong-law experiment under a g-measure.
    Simulate(commands::SimulateArgs),
    /// Witness pair and random-pair audit of noncontextuality.
    Contextuality(commands::ContextualityArgs),
    /// Least-squares density operator for a frame function.
    GleasonFit(commands::GleasonArgs),
    /// Equivalence, overlap and completeness sums for two sequences.
    Components(commands::ComponentsArgs),
}

pub enum CliError {
    Usage(String),
    Library(freqlab::Error),
    Io(std::io::Error),
}

impl From<freqlab::Error> for CliError {
    fn from(e: freqlab::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<String> for CliError {
    fn from(e: String) -> Self {
        CliError::Usage(e)
    }
}

fn fail(err: CliError) -> ExitCode {
    match err {
        CliError::Usage(msg) => {
            report_error("usage", &msg);
            ExitCode::from(2)
        }
        CliError::Library(e) => {
            report_error("library", &e.to_string());
            ExitCode::from(1)
        }
        CliError::Io(e) => {
            report_error("io", &e.to_string());
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(CliError::Usage(e.to_string()));
        }
    }

    let start = Instant::now();
    let (name, args, result) = match &cli.command {
        Command::FhConverge(a) => ("fh-converge", to_value(a), commands::fh_converge(a)),
        Command::Squires(a) => ("squires", to_value(a), commands::squires(a)),
        Command::Simulate(a) => ("simulate", to_value(a), commands::simulate(a, cli.seed)),
        Command::Contextuality(a) => (
            "contextuality",
            to_value(a),
            commands::contextuality(a, cli.seed),
        ),
        Command::GleasonFit(a) => ("gleason-fit", to_value(a), commands::gleason_fit(a, cli.seed)),
        Command::Components(a) => ("components", to_value(a), commands::components(a)),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return fail(e),
    };

    let mut config = args;
    if let Value::Object(map) = &mut config {
        map.insert("seed".into(), serde_json::json!(cli.seed));
        map.insert("format".into(), serde_json::to_value(cli.format).unwrap());
    }
    let run = Run {
        subcommand: name,
        config,
        format: cli.format,
        out: cli.out.as_deref(),
    };
    match run.emit(&outcome, start.elapsed().as_secs_f64()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(CliError::Io(e)),
    }
}

fn to_value(args: &impl serde::Serialize) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}
