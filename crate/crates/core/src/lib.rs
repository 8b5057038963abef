//! Deterministic simulator for federated learning with tokenized reward
//! distribution.
//!
//! A federation trains a shared model each round, a contribution method splits
//! the round reward between clients, and each client's reward is paid out
//! pro rata to the holders of that client's token. Tokens trade against a
//! numeraire on an automated market maker so outside investors can buy
//! exposure to a client's future rewards.
//!
//! Modules, bottom-up:
//!
//! - [`fl`]: logistic-regression federated averaging on synthetic non-IID data.
//! - [`contribution`]: equal, linear, performance and exact Shapley shares.
//! - [`ledger`]: scenario registry, token minting, holdings, pro-rata payouts.
//! - [`amm`]: constant-product, constant-sum and constant-mean pools.
//! - [`valuation`]: expected rewards and fair token values.
//! - [`agents`]: client sale policies and investor strategies.
//! - [`sim`]: the per-round pipeline, event log, exports and replay.

pub mod agents;
pub mod amm;
pub mod apportion;
pub mod contribution;
pub mod fl;
pub mod ledger;
pub mod rng;
pub mod sim;
pub mod valuation;

pub use amm::{Asset, Curve, Pool, TradeOrder};
pub use contribution::{ContributionVector, UtilityOracle};
pub use fl::{Dataset, ModelParams, TrainConfig};
pub use ledger::{
    Account, ClientId, HoldingsLedger, PayoutRecord, ScenarioSpec, TokenId, TokenLedger,
};
pub use sim::{run_simulation, SimConfig};
