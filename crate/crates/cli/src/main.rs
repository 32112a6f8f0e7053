//! `shapcredit`: Shapley credit allocation from the command line.

mod config;
mod eval;
mod explain;
mod output;
mod query;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shapcredit::{Error, ErrorCategory, Result};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "shapcredit", version, about = "Shapley credit allocation for model outputs and losses")]
struct Cli {
    /// Worker threads for data points (default: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local attributions, one JSON report per data point.
    Explain(RunConfig),
    /// Global attribution of an uncertainty measure of the target.
    Global(RunConfig),
    /// Evaluation protocols over a set of attributions.
    Eval {
        #[command(subcommand)]
        protocol: eval::Protocol,
    },
    /// Condition, intervene on or pin a network and print a law.
    NetQuery(query::QueryArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Config => 2,
        ErrorCategory::Inference => 3,
        ErrorCategory::Protocol => 4,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Explain(cfg) => explain::explain(cfg.resolve()?),
        Command::Global(cfg) => explain::global(cfg.resolve()?),
        Command::Eval { protocol } => eval::run(protocol),
        Command::NetQuery(args) => query::run(args),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
