use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twtsim::harness::{csv_document, trace_first_replication};
use twtsim::{run, sweep, Error, ScenarioConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_FATAL: u8 = 3;

#[derive(Parser)]
#[command(name = "twtsim", version, about = "Target Wake Time uplink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of one scenario and emit a single CSV row.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the master seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Writes the MAC event log of the first replication.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the scenario once per value of one config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and print it with every key resolved.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Config(String),
    Fatal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => Failure::Config(c.to_string()),
            Error::Sim(s) => Failure::Fatal(s.to_string()),
            Error::Io(io) => Failure::Fatal(io.to_string()),
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Fatal(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            trace,
        } => {
            let cfg = load(&config, seed)?;
            if let Some(path) = trace {
                let log = trace_first_replication(&cfg)?;
                fs::write(&path, log.render()).map_err(|e| Failure::Fatal(format!("{}: {e}", path.display())))?;
            }
            let metrics = run(&cfg)?;
            emit(out.as_deref(), &csv_document(&[metrics]))
        }
        Command::Sweep {
            config,
            axis,
            values,
            seed,
            out,
        } => {
            let cfg = load(&config, seed)?;
            let csv = sweep(&cfg, &axis, &values)?;
            emit(out.as_deref(), &csv)
        }
        Command::Validate { config } => {
            let cfg = load(&config, None)?;
            print!("{}", cfg.to_normalized_string());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("twtsim: configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Fatal(msg)) => {
            eprintln!("twtsim: fatal: {msg}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}
