//! Automated market maker over client tokens and a numeraire.
//!
//! A trade of `m` units of asset X for `n` units of asset Y is accepted when
//! the trading function keeps its value: `f(.., x + m, .., y - n, ..) = k`.
//! Three trading functions are supported:
//!
//! | curve          | `f`                 | `n` for deposit `m`                    |
//! |----------------|---------------------|----------------------------------------|
//! | `Product`      | `prod x_i`          | `y * m / (x + m)`                      |
//! | `Sum`          | `sum x_i`           | `m`                                    |
//! | `ConstantMean` | `prod x_i ^ w_i`    | `y * (1 - (x / (x + m)) ^ (w_x / w_y))` |
//!
//! Pool balances are reals; the ledger settles whole units, rounding the
//! trader's output down. The rounding remainder ("dust") stays in the pool's
//! ledger account and is tracked per asset.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::ledger::Asset;
use crate::ledger::{Account, HoldingsLedger, LedgerError};

/// Relative tolerance for invariant preservation and weight normalization.
pub const INVARIANT_TOLERANCE: f64 = 1e-9;
const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("asset {0} is not listed in the pool")]
    NotFound(Asset),
    #[error("asset {0} is already listed")]
    Conflict(Asset),
    #[error("insufficient liquidity: {0}")]
    Liquidity(String),
    #[error(transparent)]
    Funds(#[from] LedgerError),
    #[error("pool invariant broken: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, AmmError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Product,
    Sum,
    ConstantMean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeOrder {
    pub asset_in: Asset,
    pub asset_out: Asset,
    pub amount_in: u64,
}

impl TradeOrder {
    pub fn new(asset_in: Asset, asset_out: Asset, amount_in: u64) -> Self {
        Self {
            asset_in,
            asset_out,
            amount_in,
        }
    }
}

/// Settled trade as seen by the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub trader: Account,
    pub order: TradeOrder,
    /// Exact curve output before settlement rounding.
    pub quoted_out: f64,
    pub amount_out: u64,
    /// Always zero: the pools charge no fee.
    pub fee: u64,
    pub spot_in_after: f64,
    pub spot_out_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    assets: Vec<Asset>,
    balances: Vec<f64>,
    weights: Vec<f64>,
    curve: Curve,
    k: f64,
    dust: Vec<f64>,
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Builds a pool and fixes its invariant constant from the initial balances.
pub fn create_pool(
    assets: Vec<Asset>,
    balances: Vec<f64>,
    weights: Vec<f64>,
    curve: Curve,
) -> Result<Pool> {
    if assets.len() < 2 {
        return Err(AmmError::InvalidArgument(
            "a pool needs at least two assets".into(),
        ));
    }
    if balances.len() != assets.len() || weights.len() != assets.len() {
        return Err(AmmError::InvalidArgument(format!(
            "{} assets, {} balances, {} weights",
            assets.len(),
            balances.len(),
            weights.len()
        )));
    }
    if assets.iter().filter(|a| **a == Asset::Numeraire).count() != 1 {
        return Err(AmmError::InvalidArgument(
            "exactly one asset must be the numeraire".into(),
        ));
    }
    for (i, a) in assets.iter().enumerate() {
        if assets[..i].contains(a) {
            return Err(AmmError::Conflict(a.clone()));
        }
    }
    if let Some(i) = balances.iter().position(|b| !positive(*b)) {
        return Err(AmmError::InvalidArgument(format!(
            "balance of {} must be positive",
            assets[i]
        )));
    }
    if let Some(i) = weights.iter().position(|w| !positive(*w)) {
        return Err(AmmError::InvalidArgument(format!(
            "weight of {} must be positive",
            assets[i]
        )));
    }
    if curve == Curve::ConstantMean {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(AmmError::InvalidArgument(format!(
                "constant-mean weights sum to {sum}, not 1"
            )));
        }
    }
    let dust = vec![0.0; assets.len()];
    let mut pool = Pool {
        assets,
        balances,
        weights,
        curve,
        k: 0.0,
        dust,
    };
    pool.k = pool.invariant();
    Ok(pool)
}

impl Pool {
    pub fn curve(&self) -> Curve {
        self.curve
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn balances(&self) -> &[f64] {
        &self.balances
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Invariant constant fixed at creation (or last listing).
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn index(&self, asset: &Asset) -> Result<usize> {
        self.assets
            .iter()
            .position(|a| a == asset)
            .ok_or_else(|| AmmError::NotFound(asset.clone()))
    }

    pub fn balance(&self, asset: &Asset) -> Result<f64> {
        Ok(self.balances[self.index(asset)?])
    }

    /// Accumulated settlement rounding held back for `asset`.
    pub fn dust(&self, asset: &Asset) -> Result<f64> {
        Ok(self.dust[self.index(asset)?])
    }

    /// Trading function evaluated on the current balances.
    pub fn invariant(&self) -> f64 {
        match self.curve {
            Curve::Product => self.balances.iter().product(),
            Curve::Sum => self.balances.iter().sum(),
            Curve::ConstantMean => self
                .balances
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x.powf(*w))
                .product(),
        }
    }

    /// `|f(balances) / k - 1|`.
    pub fn invariant_drift(&self) -> f64 {
        (self.invariant() / self.k - 1.0).abs()
    }

    fn pair(&self, order: &TradeOrder) -> Result<(usize, usize)> {
        if order.asset_in == order.asset_out {
            return Err(AmmError::InvalidArgument(format!(
                "cannot trade {} for itself",
                order.asset_in
            )));
        }
        if order.amount_in == 0 {
            return Err(AmmError::InvalidArgument(
                "amount_in must be positive".into(),
            ));
        }
        Ok((self.index(&order.asset_in)?, self.index(&order.asset_out)?))
    }

    fn out_given_in(&self, i: usize, o: usize, m: f64) -> f64 {
        let (x, y) = (self.balances[i], self.balances[o]);
        match self.curve {
            Curve::Product => y * m / (x + m),
            Curve::Sum => m,
            Curve::ConstantMean => {
                // 1 - (x/(x+m))^e computed as -expm1(-e * ln(1 + m/x)).
                let e = self.weights[i] / self.weights[o];
                -y * (-e * (m / x).ln_1p()).exp_m1()
            }
        }
    }

    /// Output amount for `order`; the pool is not modified.
    pub fn quote(&self, order: &TradeOrder) -> Result<f64> {
        let (i, o) = self.pair(order)?;
        let n = self.out_given_in(i, o, order.amount_in as f64);
        let y = self.balances[o];
        if !positive(n) || !positive(y - n) {
            return Err(AmmError::Liquidity(format!(
                "{} {} in would drain {} (balance {y})",
                order.amount_in, order.asset_in, order.asset_out
            )));
        }
        Ok(n)
    }

    /// Input needed to receive exactly `amount_out` of `asset_out`.
    pub fn quote_in(&self, asset_in: &Asset, asset_out: &Asset, amount_out: f64) -> Result<f64> {
        if asset_in == asset_out {
            return Err(AmmError::InvalidArgument(format!(
                "cannot trade {asset_in} for itself"
            )));
        }
        let (i, o) = (self.index(asset_in)?, self.index(asset_out)?);
        let (x, y) = (self.balances[i], self.balances[o]);
        if !positive(amount_out) || amount_out >= y {
            return Err(AmmError::Liquidity(format!(
                "cannot take {amount_out} of {asset_out} (balance {y})"
            )));
        }
        Ok(match self.curve {
            Curve::Product => x * amount_out / (y - amount_out),
            Curve::Sum => amount_out,
            Curve::ConstantMean => {
                let e = self.weights[o] / self.weights[i];
                x * (e * (-amount_out / y).ln_1p().abs()).exp_m1()
            }
        })
    }

    /// Marginal price of `asset` in numeraire units; the numeraire is 1.
    pub fn spot_price(&self, asset: &Asset) -> Result<f64> {
        let a = self.index(asset)?;
        if *asset == Asset::Numeraire {
            return Ok(1.0);
        }
        let num = self.index(&Asset::Numeraire)?;
        Ok(match self.curve {
            Curve::Product => self.balances[num] / self.balances[a],
            Curve::Sum => 1.0,
            Curve::ConstantMean => {
                (self.weights[a] / self.balances[a]) / (self.weights[num] / self.balances[num])
            }
        })
    }

    /// Executes `order` against the pool balances only. Returns the exact
    /// output amount; a rejected order leaves the pool untouched.
    pub fn apply(&mut self, order: &TradeOrder) -> Result<f64> {
        let n = self.quote(order)?;
        let (i, o) = self.pair(order)?;
        let before = (self.balances[i], self.balances[o]);
        self.balances[i] += order.amount_in as f64;
        self.balances[o] -= n;
        let drift = self.invariant_drift();
        if drift > INVARIANT_TOLERANCE {
            self.balances[i] = before.0;
            self.balances[o] = before.1;
            return Err(AmmError::Invariant(format!(
                "trade would move the invariant by {drift:e}"
            )));
        }
        Ok(n)
    }

    /// Adds a token to a constant-mean pool with weight `weight`; the other
    /// weights are scaled by `1 - weight`. `seed_numeraire` is added to the
    /// numeraire reserve. The invariant constant is recomputed.
    pub fn list_token(
        &mut self,
        asset: Asset,
        seed_balance: f64,
        seed_numeraire: f64,
        weight: f64,
    ) -> Result<()> {
        if self.curve != Curve::ConstantMean {
            return Err(AmmError::InvalidArgument(
                "tokens can only be listed on constant-mean pools".into(),
            ));
        }
        if self.assets.contains(&asset) {
            return Err(AmmError::Conflict(asset));
        }
        if !positive(seed_balance) {
            return Err(AmmError::InvalidArgument(
                "seed balance must be positive".into(),
            ));
        }
        if !(seed_numeraire.is_finite() && seed_numeraire >= 0.0) {
            return Err(AmmError::InvalidArgument(
                "seed numeraire must be non-negative".into(),
            ));
        }
        if !(positive(weight) && weight < 1.0) {
            return Err(AmmError::InvalidArgument(format!(
                "listing weight {weight} must be in (0, 1)"
            )));
        }
        let num = self.index(&Asset::Numeraire)?;
        self.balances[num] += seed_numeraire;
        for w in &mut self.weights {
            *w *= 1.0 - weight;
        }
        self.assets.push(asset);
        self.balances.push(seed_balance);
        self.weights.push(weight);
        self.dust.push(0.0);
        self.k = self.invariant();
        Ok(())
    }
}

/// Settles `order` for `trader`: the trader pays `amount_in` to the pool
/// account and receives the quote rounded down to whole units. Pool and
/// ledger are both unchanged when the swap fails.
pub fn swap(
    pool: &mut Pool,
    order: &TradeOrder,
    ledger: &mut HoldingsLedger,
    trader: Account,
) -> Result<TradeRecord> {
    if trader == Account::Pool {
        return Err(AmmError::InvalidArgument(
            "the pool cannot trade with itself".into(),
        ));
    }
    let quoted = pool.quote(order)?;
    let settled = quoted.floor() as u64;
    if settled == 0 {
        return Err(AmmError::Liquidity(format!(
            "{} {} buys less than one unit",
            order.amount_in, order.asset_in
        )));
    }
    let available = ledger.balance(&order.asset_in, trader);
    if available < order.amount_in {
        return Err(LedgerError::InsufficientFunds {
            account: trader,
            asset: order.asset_in.clone(),
            needed: order.amount_in,
            available,
        }
        .into());
    }
    let pool_has = ledger.balance(&order.asset_out, Account::Pool);
    if pool_has < settled {
        return Err(AmmError::Invariant(format!(
            "pool account holds {pool_has} {} but owes {settled}",
            order.asset_out
        )));
    }

    let mut trial = pool.clone();
    let exact = trial.apply(order)?;
    ledger.transfer(&order.asset_in, trader, Account::Pool, order.amount_in)?;
    if let Err(e) = ledger.transfer(&order.asset_out, Account::Pool, trader, settled) {
        ledger
            .transfer(&order.asset_in, Account::Pool, trader, order.amount_in)
            .expect("undo of a fresh transfer");
        return Err(e.into());
    }
    let o = trial.index(&order.asset_out)?;
    trial.dust[o] += exact - settled as f64;
    *pool = trial;
    Ok(TradeRecord {
        trader,
        order: order.clone(),
        quoted_out: exact,
        amount_out: settled,
        fee: 0,
        spot_in_after: pool.spot_price(&order.asset_in)?,
        spot_out_after: pool.spot_price(&order.asset_out)?,
    })
}
