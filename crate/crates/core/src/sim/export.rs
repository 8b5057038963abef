use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{EventKind, EventLog, FinalState, SimError};

pub const OUTPUT_FILES: [&str; 4] = ["rewards.csv", "payouts.csv", "prices.csv", "events.jsonl"];

fn io(path: &Path, e: impl std::fmt::Display) -> SimError {
    SimError::Io(format!("{}: {e}", path.display()))
}

/// Shortest round-trip decimal, always with a decimal point.
fn decimal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, SimError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    Ok(w)
}

/// Writes `rewards.csv`, `payouts.csv`, `prices.csv` and `events.jsonl`
/// into `dir`, creating it if needed.
pub fn export_csv(log: &EventLog, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;

    let rewards_path = dir.join("rewards.csv");
    let payouts_path = dir.join("payouts.csv");
    let prices_path = dir.join("prices.csv");
    let mut rewards = csv_writer(
        &rewards_path,
        &["round", "client_id", "contribution_share", "reward_micro"],
    )?;
    let mut payouts = csv_writer(&payouts_path, &["round", "token", "account", "amount"])?;
    let mut prices = csv_writer(
        &prices_path,
        &["round", "token", "spot_price", "fair_value"],
    )?;

    let mut shares: Vec<f64> = Vec::new();
    for e in log.events() {
        let round = e.round.to_string();
        match &e.kind {
            EventKind::ContributionComputed { shares: s, .. } => shares = s.clone(),
            EventKind::RewardEmitted { amounts, .. } => {
                for (client, amount) in amounts {
                    let share = shares.get(client.0 as usize).copied().ok_or_else(|| {
                        SimError::Invariant(format!(
                            "round {} rewards client {client} without a share",
                            e.round
                        ))
                    })?;
                    rewards
                        .write_record([
                            &round,
                            &client.to_string(),
                            &decimal(share),
                            &amount.to_string(),
                        ])
                        .map_err(|err| io(&rewards_path, err))?;
                }
            }
            EventKind::PayoutExecuted { records } => {
                for r in records {
                    payouts
                        .write_record([
                            &round,
                            &r.token.to_string(),
                            &r.account.to_string(),
                            &r.amount.to_string(),
                        ])
                        .map_err(|err| io(&payouts_path, err))?;
                }
            }
            EventKind::PricesObserved { prices: rows } => {
                for p in rows {
                    let spot = p.spot_price.map(decimal).unwrap_or_default();
                    prices
                        .write_record([&round, &p.token.to_string(), &spot, &decimal(p.fair_value)])
                        .map_err(|err| io(&prices_path, err))?;
                }
            }
            _ => {}
        }
    }
    rewards.flush().map_err(|e| io(&rewards_path, e))?;
    payouts.flush().map_err(|e| io(&payouts_path, e))?;
    prices.flush().map_err(|e| io(&prices_path, e))?;

    let events_path = dir.join("events.jsonl");
    let file = File::create(&events_path).map_err(|e| io(&events_path, e))?;
    let mut out = BufWriter::new(file);
    log.write_jsonl(&mut out)?;
    out.flush().map_err(|e| io(&events_path, e))?;
    Ok(())
}

/// Writes `final_state.json`, which `replay` compares against.
pub fn write_final_state(state: &FinalState, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join("final_state.json");
    let text = serde_json::to_string_pretty(state).map_err(|e| io(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| io(&path, e))
}
