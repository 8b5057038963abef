use std::collections::BTreeMap;

use crate::amm::{self, AmmError, Pool};
use crate::contribution::ContributionVector;
use crate::ledger::{ClientId, ScenarioSpec, TokenLedger};

use super::{check_books, check_pool, EventKind, EventLog, FinalState, SimError};

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub final_state: FinalState,
    pub rounds: u32,
    pub events: usize,
    pub trades: usize,
    pub rejected_orders: usize,
}

fn violation(seq: u64, msg: impl std::fmt::Display) -> SimError {
    SimError::Invariant(format!("event {seq}: {msg}"))
}

#[derive(Default)]
struct Replayer {
    ledger: TokenLedger,
    pool: Option<Pool>,
    spec: Option<ScenarioSpec>,
    deposited: u128,
    emitted: u128,
    paid: u128,
    round: u32,
    pending: Option<BTreeMap<ClientId, u64>>,
    paid_this_round: bool,
    trades: usize,
    rejected: usize,
}

impl Replayer {
    fn spec(&self, seq: u64) -> Result<&ScenarioSpec, SimError> {
        self.spec
            .as_ref()
            .ok_or_else(|| violation(seq, "no scenario registered yet"))
    }

    fn check_round_end(&self) -> Result<(), SimError> {
        check_books(
            self.ledger.holdings(),
            self.deposited,
            self.emitted,
            self.paid,
            self.round,
        )?;
        if let Some(pool) = &self.pool {
            check_pool(pool, self.ledger.holdings())?;
        }
        Ok(())
    }

    fn apply(&mut self, seq: u64, round: u32, kind: &EventKind) -> Result<(), SimError> {
        if kind.is_trade() && round > 0 && !self.paid_this_round {
            return Err(violation(
                seq,
                format!("trade in round {round} precedes the round's payout"),
            ));
        }
        match kind {
            EventKind::ScenarioRegistered { spec } => {
                self.ledger
                    .register_scenario(spec.clone())
                    .map_err(|e| violation(seq, e))?;
                self.spec = Some(spec.clone());
            }
            EventKind::ClientJoined { client, minted } => {
                let id = self.spec(seq)?.id.clone();
                let got = self
                    .ledger
                    .join_scenario(&id, *client, *minted > 0)
                    .map_err(|e| violation(seq, e))?;
                if got != *minted {
                    return Err(violation(
                        seq,
                        format!("client {client} minted {got}, log says {minted}"),
                    ));
                }
            }
            EventKind::Deposit { account, amount } => {
                self.ledger.holdings_mut().deposit(*account, *amount);
                self.deposited += *amount as u128;
            }
            EventKind::Transfer {
                asset,
                from,
                to,
                amount,
            } => {
                self.ledger
                    .holdings_mut()
                    .transfer(asset, *from, *to, *amount)
                    .map_err(|e| violation(seq, e))?;
            }
            EventKind::PoolCreated {
                assets,
                balances,
                weights,
                curve,
            } => {
                if self.pool.is_some() {
                    return Err(violation(seq, "pool created twice"));
                }
                let pool =
                    amm::create_pool(assets.clone(), balances.clone(), weights.clone(), *curve)
                        .map_err(|e| violation(seq, e))?;
                self.pool = Some(pool);
            }
            EventKind::RoundStarted => {
                if round != self.round + 1 {
                    return Err(violation(
                        seq,
                        format!("round {round} follows round {}", self.round),
                    ));
                }
                self.round = round;
                self.pending = None;
                self.paid_this_round = false;
            }
            EventKind::ModelAggregated { utility } => {
                if !(0.0..=1.0).contains(utility) {
                    return Err(violation(seq, format!("utility {utility} outside [0, 1]")));
                }
            }
            EventKind::ContributionComputed { shares, .. } => {
                let n = self.spec(seq)?.clients as usize;
                if shares.len() != n {
                    return Err(violation(
                        seq,
                        format!("{} shares for {n} clients", shares.len()),
                    ));
                }
                ContributionVector::new(shares.clone()).map_err(|e| violation(seq, e))?;
            }
            EventKind::RewardEmitted { total, amounts } => {
                let scheduled = self.spec(seq)?.reward.round_reward(round);
                if *total != scheduled {
                    return Err(violation(
                        seq,
                        format!("emitted {total}, schedule says {scheduled}"),
                    ));
                }
                let sum: u64 = amounts.iter().map(|(_, a)| a).sum();
                if sum != *total {
                    return Err(violation(
                        seq,
                        format!("client rewards sum to {sum}, not {total}"),
                    ));
                }
                self.emitted += *total as u128;
                self.pending = Some(amounts.iter().copied().collect());
            }
            EventKind::PayoutExecuted { records } => {
                let rewards = self
                    .pending
                    .take()
                    .ok_or_else(|| violation(seq, "payout without a reward"))?;
                let id = self.spec(seq)?.id.clone();
                let planned = self
                    .ledger
                    .plan_payouts(&id, round, &rewards)
                    .map_err(|e| violation(seq, e))?;
                if planned != *records {
                    return Err(violation(
                        seq,
                        "payout records differ from the pro-rata split of holdings",
                    ));
                }
                for (client, reward) in &rewards {
                    let got: u64 = records
                        .iter()
                        .filter(|r| r.token.client == *client)
                        .map(|r| r.amount)
                        .sum();
                    if got != *reward {
                        return Err(violation(
                            seq,
                            format!("client {client} paid {got} of reward {reward}"),
                        ));
                    }
                }
                self.ledger
                    .distribute_reward(&id, round, &rewards)
                    .map_err(|e| violation(seq, e))?;
                self.paid += records.iter().map(|r| r.amount as u128).sum::<u128>();
                self.paid_this_round = true;
            }
            EventKind::TradeExecuted { trade } => {
                let pool = self
                    .pool
                    .as_mut()
                    .ok_or_else(|| violation(seq, "trade without a pool"))?;
                let redo = amm::swap(pool, &trade.order, self.ledger.holdings_mut(), trade.trader)
                    .map_err(|e| violation(seq, format!("logged trade fails on replay: {e}")))?;
                if redo != *trade {
                    return Err(violation(seq, "trade settles differently on replay"));
                }
                self.trades += 1;
            }
            EventKind::OrderRejected { trader, order, .. } => {
                let pool = self
                    .pool
                    .as_ref()
                    .ok_or_else(|| violation(seq, "order without a pool"))?;
                let mut pool = pool.clone();
                let mut holdings = self.ledger.holdings().clone();
                match amm::swap(&mut pool, order, &mut holdings, *trader) {
                    Ok(_) => return Err(violation(seq, "logged rejection succeeds on replay")),
                    Err(AmmError::Invariant(e)) => return Err(violation(seq, e)),
                    Err(_) => {}
                }
                self.rejected += 1;
            }
            EventKind::PricesObserved { prices } => {
                for row in prices {
                    let spot = match &self.pool {
                        Some(p) => Some(
                            p.spot_price(&crate::ledger::Asset::Token(row.token.clone()))
                                .map_err(|e| violation(seq, e))?,
                        ),
                        None => None,
                    };
                    if spot != row.spot_price {
                        return Err(violation(
                            seq,
                            format!("spot price of {} differs on replay", row.token),
                        ));
                    }
                }
                self.check_round_end()?;
            }
        }
        Ok(())
    }
}

/// Rebuilds ledger and pool from the log, re-executing every payout and
/// trade and re-checking conservation, ordering and pool invariants.
pub fn replay(log: &EventLog) -> Result<ReplayReport, SimError> {
    let mut r = Replayer::default();
    let mut last_round = 0;
    for (i, e) in log.events().iter().enumerate() {
        if e.seq != i as u64 {
            return Err(violation(
                e.seq,
                format!("sequence number out of order at position {i}"),
            ));
        }
        if e.round < last_round {
            return Err(violation(
                e.seq,
                format!("round {} after round {last_round}", e.round),
            ));
        }
        last_round = e.round;
        r.apply(e.seq, e.round, &e.kind)?;
    }
    r.check_round_end()?;
    if let Some(spec) = &r.spec {
        if r.round != spec.reward.rounds() {
            return Err(SimError::Invariant(format!(
                "log ends after round {} of {}",
                r.round,
                spec.reward.rounds()
            )));
        }
    }
    Ok(ReplayReport {
        final_state: FinalState {
            ledger: r.ledger,
            pool: r.pool,
        },
        rounds: r.round,
        events: log.len(),
        trades: r.trades,
        rejected_orders: r.rejected,
    })
}
