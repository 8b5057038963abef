//! Token pricing from reward expectations.
//!
//! With a pre-established reward `R` paid evenly over `T` rounds to `n`
//! clients, a client expects `R / (T n)` per round and `R / n` in total, and a
//! token's fair value decays linearly to zero at the final round.
//! Open-ended federations are priced with a trailing-earnings multiple.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ValuationError>;

pub const DEFAULT_TRAILING_WINDOW: usize = 5;

fn invalid(msg: impl Into<String>) -> ValuationError {
    ValuationError::InvalidArgument(msg.into())
}

pub fn expected_per_round_reward(total: f64, rounds: u32, clients: u32) -> Result<f64> {
    if rounds == 0 || clients == 0 {
        return Err(invalid(format!(
            "rounds ({rounds}) and clients ({clients}) must be >= 1"
        )));
    }
    Ok(total / (rounds as f64 * clients as f64))
}

pub fn expected_total_per_client(total: f64, clients: u32) -> Result<f64> {
    if clients == 0 {
        return Err(invalid("clients must be >= 1"));
    }
    Ok(total / clients as f64)
}

/// Remaining expected reward per token unit after `round` of `rounds`
/// rounds have been paid: `R (T - t) / (T n supply)`.
pub fn fair_token_value(
    total: f64,
    rounds: u32,
    round: u32,
    clients: u32,
    supply: u64,
) -> Result<f64> {
    if rounds == 0 || clients == 0 || supply == 0 {
        return Err(invalid("rounds, clients and supply must be >= 1"));
    }
    if round > rounds {
        return Err(invalid(format!(
            "round {round} is past the last round {rounds}"
        )));
    }
    let remaining = (rounds - round) as f64;
    Ok(total * remaining / (rounds as f64 * clients as f64 * supply as f64))
}

/// Trailing-earnings estimate: mean of the last `window` per-token payouts
/// times `multiple`.
pub fn open_ended_value(trailing_payouts: &[f64], multiple: f64, window: usize) -> Result<f64> {
    if trailing_payouts.is_empty() {
        return Err(invalid("no payout history"));
    }
    if window == 0 {
        return Err(invalid("window must be >= 1"));
    }
    if !(multiple.is_finite() && multiple > 0.0) {
        return Err(invalid(format!("multiple {multiple} must be positive")));
    }
    let recent = &trailing_payouts[trailing_payouts.len().saturating_sub(window)..];
    let mean = recent.iter().sum::<f64>() / recent.len() as f64;
    Ok(mean * multiple)
}
