//! Trading policies: clients selling their own tokens and investors buying
//! exposure to clients. Policies only decide; the harness executes the
//! returned orders against the pool and ledger, dropping any that fail.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amm::{Pool, TradeOrder};
use crate::ledger::{Account, Asset, HoldingsLedger, TokenId};
use crate::rng::{self, tag};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientPolicy {
    /// Whether the client mints its token when joining.
    #[serde(default = "default_true")]
    pub mint: bool,
    /// Fraction of the total supply sold in the join round.
    #[serde(default)]
    pub sell_fraction_at_join: f64,
    /// Fraction of current holdings sold in every later round.
    #[serde(default)]
    pub per_round_sell_fraction: f64,
    /// Lets a client trade other clients' tokens.
    #[serde(default)]
    pub investor: Option<InvestorPolicy>,
}

impl Default for ClientPolicy {
    fn default() -> Self {
        Self {
            mint: true,
            sell_fraction_at_join: 0.0,
            per_round_sell_fraction: 0.0,
            investor: None,
        }
    }
}

impl ClientPolicy {
    pub fn violations(&self, path: &str) -> Vec<String> {
        let mut v = Vec::new();
        for (name, f) in [
            ("sell_fraction_at_join", self.sell_fraction_at_join),
            ("per_round_sell_fraction", self.per_round_sell_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                v.push(format!("{path}.{name} = {f} is outside [0, 1]"));
            }
        }
        if !self.mint && (self.sell_fraction_at_join > 0.0 || self.per_round_sell_fraction > 0.0) {
            v.push(format!("{path} sells tokens but {path}.mint is false"));
        }
        if let Some(inv) = &self.investor {
            v.extend(inv.violations(&format!("{path}.investor")));
        }
        v
    }
}

/// What a client sees when deciding.
#[derive(Debug, Clone)]
pub struct ClientView<'a> {
    pub token: &'a TokenId,
    pub join_round: bool,
    pub holdings: u64,
    pub supply: u64,
}

pub fn client_act(policy: &ClientPolicy, view: &ClientView<'_>) -> Vec<TradeOrder> {
    if !policy.mint {
        return Vec::new();
    }
    let amount = if view.join_round {
        ((policy.sell_fraction_at_join * view.supply as f64).floor() as u64).min(view.holdings)
    } else {
        (policy.per_round_sell_fraction * view.holdings as f64).floor() as u64
    };
    if amount == 0 {
        return Vec::new();
    }
    vec![TradeOrder::new(
        Asset::Token(view.token.clone()),
        Asset::Numeraire,
        amount,
    )]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvestorKind {
    /// Buys `trade_size` of every target once, then holds.
    BuyAndHold,
    /// Buys below `fair * (1 - margin)`, sells above `fair * (1 + margin)`.
    Value { margin: f64 },
    /// Seeded coin flip between a buy and a sell every round.
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestorPolicy {
    #[serde(flatten)]
    pub kind: InvestorKind,
    /// Token units per buy or sell.
    pub trade_size: u64,
    /// Client ids whose tokens are traded; empty means all.
    #[serde(default)]
    pub targets: Vec<u32>,
    /// Numeraire micro-units deposited for a third-party investor.
    #[serde(default)]
    pub budget: u64,
}

impl InvestorPolicy {
    pub fn violations(&self, path: &str) -> Vec<String> {
        let mut v = Vec::new();
        if self.trade_size == 0 {
            v.push(format!("{path}.trade_size must be positive"));
        }
        if let InvestorKind::Value { margin } = self.kind {
            if !(margin.is_finite() && margin > 0.0) {
                v.push(format!("{path}.margin = {margin} must be positive"));
            }
        }
        v
    }
}

/// What an investor sees when deciding.
#[derive(Debug, Clone)]
pub struct InvestorView<'a> {
    pub account: Account,
    pub round: u32,
    /// The first trading phase this agent takes part in.
    pub first_round: bool,
    /// Seed for the agent's own random stream.
    pub seed: u64,
    pub pool: &'a Pool,
    pub fair_values: &'a BTreeMap<TokenId, f64>,
    pub holdings: &'a HoldingsLedger,
    pub targets: &'a [TokenId],
}

/// Numeraire needed to buy `units` tokens, rounded up to whole micro-units.
fn buy_order(pool: &Pool, token: &TokenId, units: u64) -> Option<TradeOrder> {
    let asset = Asset::Token(token.clone());
    let cost = pool
        .quote_in(&Asset::Numeraire, &asset, units as f64)
        .ok()?;
    let amount = cost.ceil();
    (amount >= 1.0 && amount < u64::MAX as f64)
        .then(|| TradeOrder::new(Asset::Numeraire, asset, amount as u64))
}

fn sell_order(view: &InvestorView<'_>, token: &TokenId, units: u64) -> Option<TradeOrder> {
    let held = view.holdings.token_balance(token, view.account);
    let amount = units.min(held);
    (amount > 0).then(|| TradeOrder::new(Asset::Token(token.clone()), Asset::Numeraire, amount))
}

pub fn investor_act(policy: &InvestorPolicy, view: &InvestorView<'_>) -> Vec<TradeOrder> {
    let mut orders = Vec::new();
    for (idx, token) in view.targets.iter().enumerate() {
        let order = match policy.kind {
            InvestorKind::BuyAndHold => {
                if view.first_round {
                    buy_order(view.pool, token, policy.trade_size)
                } else {
                    None
                }
            }
            InvestorKind::Value { margin } => {
                let (Some(&fair), Ok(spot)) = (
                    view.fair_values.get(token),
                    view.pool.spot_price(&Asset::Token(token.clone())),
                ) else {
                    continue;
                };
                if spot < fair * (1.0 - margin) {
                    buy_order(view.pool, token, policy.trade_size)
                } else if spot > fair * (1.0 + margin) {
                    sell_order(view, token, policy.trade_size)
                } else {
                    None
                }
            }
            InvestorKind::Noise => {
                let mut coin = rng::stream(
                    view.seed,
                    &[tag::NOISE_AGENT, view.round as u64, idx as u64],
                );
                if coin.random_bool(0.5) {
                    buy_order(view.pool, token, policy.trade_size)
                } else {
                    sell_order(view, token, policy.trade_size)
                }
            }
        };
        orders.extend(order);
    }
    orders
}
