//! Command-line front end: `simulate`, `validate` and `replay`.
//!
//! Exit codes: 0 on success, 1 on config or I/O errors, 2 on invariant
//! violations.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedtoken::sim::{self, EventLog, FinalState, SimConfig, SimError};

#[derive(Parser)]
#[command(
    name = "fedtoken",
    version,
    about = "Tokenized federated-learning reward simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write rewards, payouts, prices and events.
    Simulate {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to `output.dir` or `./out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and list every violation.
    Validate { config: PathBuf },
    /// Rebuild the final state from an event log and re-check invariants.
    Replay { events: PathBuf },
}

fn simulate(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), SimError> {
    let mut cfg = SimConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let outcome = sim::run_simulation(&cfg)?;
    sim::export_csv(&outcome.log, &dir)?;
    sim::write_final_state(&outcome.final_state, &dir)?;
    println!(
        "simulated {} rounds, {} events, final accuracy {:.4}; wrote {}",
        cfg.federation.rounds,
        outcome.log.len(),
        outcome.final_accuracy,
        dir.display()
    );
    Ok(())
}

fn validate(config: &Path) -> Result<(), SimError> {
    let cfg = SimConfig::load(config)?;
    let violations = sim::validate_config(&cfg);
    if violations.is_empty() {
        println!("{}: ok", config.display());
        Ok(())
    } else {
        Err(SimError::Config(violations))
    }
}

fn replay(events: &Path) -> Result<(), SimError> {
    let file =
        File::open(events).map_err(|e| SimError::Io(format!("{}: {e}", events.display())))?;
    let log = EventLog::read_jsonl(BufReader::new(file))?;
    let report = sim::replay(&log)?;
    let state_path = events.with_file_name("final_state.json");
    let compared = if state_path.exists() {
        let text = std::fs::read_to_string(&state_path)
            .map_err(|e| SimError::Io(format!("{}: {e}", state_path.display())))?;
        let recorded: FinalState = serde_json::from_str(&text)
            .map_err(|e| SimError::Parse(format!("{}: {e}", state_path.display())))?;
        if recorded != report.final_state {
            return Err(SimError::Invariant(format!(
                "replayed state differs from {}",
                state_path.display()
            )));
        }
        true
    } else {
        false
    };
    println!(
        "replayed {} events over {} rounds ({} trades, {} rejected orders); invariants hold{}",
        report.events,
        report.rounds,
        report.trades,
        report.rejected_orders,
        if compared {
            "; final state matches"
        } else {
            ""
        }
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, seed, out } => simulate(&config, seed, out),
        Command::Validate { config } => validate(&config),
        Command::Replay { events } => replay(&events),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                SimError::Config(violations) => {
                    eprintln!("invalid config:");
                    for v in violations {
                        eprintln!("  - {v}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
