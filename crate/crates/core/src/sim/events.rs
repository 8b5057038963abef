use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::amm::{Curve, TradeOrder, TradeRecord};
use crate::ledger::{Account, Asset, ClientId, PayoutRecord, ScenarioSpec, TokenId};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub token: TokenId,
    /// `None` when no pool is configured.
    pub spot_price: Option<f64>,
    pub fair_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    ScenarioRegistered {
        spec: ScenarioSpec,
    },
    ClientJoined {
        client: ClientId,
        minted: u64,
    },
    Deposit {
        account: Account,
        amount: u64,
    },
    Transfer {
        asset: Asset,
        from: Account,
        to: Account,
        amount: u64,
    },
    PoolCreated {
        assets: Vec<Asset>,
        balances: Vec<f64>,
        weights: Vec<f64>,
        curve: Curve,
    },
    RoundStarted,
    ModelAggregated {
        utility: f64,
    },
    ContributionComputed {
        shares: Vec<f64>,
        /// Unnormalized Shapley values, when that method is used.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shapley: Option<Vec<f64>>,
    },
    RewardEmitted {
        total: u64,
        amounts: Vec<(ClientId, u64)>,
    },
    PayoutExecuted {
        records: Vec<PayoutRecord>,
    },
    TradeExecuted {
        trade: TradeRecord,
    },
    OrderRejected {
        trader: Account,
        order: TradeOrder,
        reason: String,
    },
    PricesObserved {
        prices: Vec<PriceRow>,
    },
}

impl EventKind {
    pub fn is_trade(&self) -> bool {
        matches!(
            self,
            EventKind::TradeExecuted { .. } | EventKind::OrderRejected { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub round: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Append-only, ordered by `(round, seq)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: u32, kind: EventKind) {
        let seq = self.events.len() as u64;
        if let Some(last) = self.events.last() {
            debug_assert!(round >= last.round, "event rounds must not go backwards");
        }
        self.events.push(Event { seq, round, kind });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events without order checks; replay verifies the order itself.
    pub fn from_events(events: Vec<Event>) -> Self {
        Self { events }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<(), SimError> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e).map_err(|e| SimError::Io(e.to_string()))?;
            out.write_all(b"\n")
                .map_err(|e| SimError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Self, SimError> {
        let mut events = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| SimError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(&line)
                .map_err(|e| SimError::Parse(format!("line {}: {e}", i + 1)))?;
            events.push(event);
        }
        Ok(Self { events })
    }
}
