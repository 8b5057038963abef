//! In-process registry and holdings book: scenario registration, client
//! onboarding with token minting, transfers and pro-rata reward payouts.
//!
//! Numeraire amounts are integer micro-units and token amounts whole units,
//! so every payout conserves value exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::apportion;
use crate::contribution::IncentiveMethod;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("insufficient funds: {account} holds {available} {asset}, needs {needed}")]
    InsufficientFunds {
        account: Account,
        asset: Asset,
        needed: u64,
        available: u64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LedgerError>;

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioId(pub String);

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClientId(pub u32);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A client's token within one scenario; printed as `scenario/client`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId {
    pub scenario: ScenarioId,
    pub client: ClientId,
}

impl TokenId {
    pub fn new(scenario: &ScenarioId, client: ClientId) -> Self {
        Self {
            scenario: scenario.clone(),
            client,
        }
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.scenario, self.client)
    }
}

impl FromStr for TokenId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (scenario, client) = s
            .rsplit_once('/')
            .ok_or_else(|| format!("bad token id {s:?}"))?;
        let client = client
            .parse()
            .map_err(|_| format!("bad client in token id {s:?}"))?;
        Ok(Self {
            scenario: ScenarioId(scenario.to_string()),
            client: ClientId(client),
        })
    }
}

string_serde!(TokenId);

/// Anything that can hold balances. The derived order (clients, investors,
/// pool, liquidity provider; ids ascending) is the payout tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Account {
    Client(u32),
    Investor(u32),
    Pool,
    LiquidityProvider,
}

impl fmt::Display for Account {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Account::Client(i) => write!(f, "client-{i}"),
            Account::Investor(i) => write!(f, "investor-{i}"),
            Account::Pool => f.write_str("pool"),
            Account::LiquidityProvider => f.write_str("lp"),
        }
    }
}

impl FromStr for Account {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("bad account {s:?}");
        match s {
            "pool" => Ok(Account::Pool),
            "lp" => Ok(Account::LiquidityProvider),
            _ => {
                if let Some(i) = s.strip_prefix("client-") {
                    i.parse().map(Account::Client).map_err(|_| bad())
                } else if let Some(i) = s.strip_prefix("investor-") {
                    i.parse().map(Account::Investor).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

string_serde!(Account);

/// A tradeable asset: the numeraire or a client token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Asset {
    Numeraire,
    Token(TokenId),
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Asset::Numeraire => f.write_str("numeraire"),
            Asset::Token(t) => t.fmt(f),
        }
    }
}

impl FromStr for Asset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "numeraire" {
            Ok(Asset::Numeraire)
        } else {
            s.parse().map(Asset::Token)
        }
    }
}

string_serde!(Asset);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardSchedule {
    /// `total` micro-units paid in equal installments over `rounds` rounds.
    PreEstablished {
        total: u64,
        rounds: u32,
    },
    PerRound {
        amounts: Vec<u64>,
    },
}

impl RewardSchedule {
    pub fn rounds(&self) -> u32 {
        match self {
            RewardSchedule::PreEstablished { rounds, .. } => *rounds,
            RewardSchedule::PerRound { amounts } => amounts.len() as u32,
        }
    }

    pub fn total(&self) -> u64 {
        match self {
            RewardSchedule::PreEstablished { total, .. } => *total,
            RewardSchedule::PerRound { amounts } => amounts.iter().sum(),
        }
    }

    /// Reward emitted in `round` (1-based). Pre-established totals that do
    /// not divide evenly give the extra units to the earliest rounds.
    pub fn round_reward(&self, round: u32) -> u64 {
        if round == 0 || round > self.rounds() {
            return 0;
        }
        match self {
            RewardSchedule::PreEstablished { total, rounds } => {
                let base = total / *rounds as u64;
                let extra = total % *rounds as u64;
                base + u64::from((round as u64) <= extra)
            }
            RewardSchedule::PerRound { amounts } => amounts[round as usize - 1],
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            RewardSchedule::PreEstablished { total, rounds } => {
                if *total == 0 {
                    return Err("reward.total must be > 0".into());
                }
                if *rounds == 0 {
                    return Err("reward.rounds must be >= 1".into());
                }
            }
            RewardSchedule::PerRound { amounts } => {
                if amounts.is_empty() {
                    return Err("reward.amounts must list at least one round".into());
                }
            }
        }
        Ok(())
    }
}

/// Registration record of a federation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub use_case: String,
    pub reward: RewardSchedule,
    pub clients: u32,
    pub aggregation: String,
    pub incentive: IncentiveMethod,
    pub token_supply_per_client: u64,
    /// Federation details (data scheme, epochs, ...) kept as opaque text.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.0.is_empty() || self.id.0.contains('/') {
            return Err(format!(
                "scenario id {:?} must be non-empty and contain no '/'",
                self.id.0
            ));
        }
        self.reward.validate()?;
        if self.clients == 0 {
            return Err("scenario.clients must be >= 1".into());
        }
        if self.token_supply_per_client == 0 {
            return Err("scenario.token_supply_per_client must be >= 1".into());
        }
        Ok(())
    }
}

/// One holder's cut of one client's round reward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoutRecord {
    pub round: u32,
    pub token: TokenId,
    pub account: Account,
    pub amount: u64,
}

/// Token and numeraire balances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldingsLedger {
    tokens: BTreeMap<TokenId, BTreeMap<Account, u64>>,
    supply: BTreeMap<TokenId, u64>,
    numeraire: BTreeMap<Account, u64>,
}

impl HoldingsLedger {
    pub fn token_balance(&self, token: &TokenId, account: Account) -> u64 {
        self.tokens
            .get(token)
            .and_then(|h| h.get(&account))
            .copied()
            .unwrap_or(0)
    }

    pub fn numeraire_balance(&self, account: Account) -> u64 {
        self.numeraire.get(&account).copied().unwrap_or(0)
    }

    pub fn balance(&self, asset: &Asset, account: Account) -> u64 {
        match asset {
            Asset::Numeraire => self.numeraire_balance(account),
            Asset::Token(t) => self.token_balance(t, account),
        }
    }

    /// Holders of `token` with positive balances, in account order.
    pub fn holders(&self, token: &TokenId) -> impl Iterator<Item = (Account, u64)> + '_ {
        self.tokens
            .get(token)
            .into_iter()
            .flat_map(|h| h.iter().map(|(a, b)| (*a, *b)))
    }

    pub fn supply(&self, token: &TokenId) -> Option<u64> {
        self.supply.get(token).copied()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TokenId> {
        self.supply.keys()
    }

    pub fn numeraire_accounts(&self) -> impl Iterator<Item = (Account, u64)> + '_ {
        self.numeraire.iter().map(|(a, b)| (*a, *b))
    }

    pub fn total_numeraire(&self) -> u128 {
        self.numeraire.values().map(|&b| b as u128).sum()
    }

    /// Sum of balances of `token` across accounts.
    pub fn circulating(&self, token: &TokenId) -> u128 {
        self.holders(token).map(|(_, b)| b as u128).sum()
    }

    fn mint(&mut self, token: &TokenId, to: Account, amount: u64) -> Result<()> {
        if self.supply.contains_key(token) {
            return Err(LedgerError::Conflict(format!(
                "token {token} already minted"
            )));
        }
        self.supply.insert(token.clone(), amount);
        if amount > 0 {
            self.tokens
                .entry(token.clone())
                .or_default()
                .insert(to, amount);
        }
        Ok(())
    }

    /// Brings outside numeraire into the ledger (investor budgets, liquidity).
    pub fn deposit(&mut self, to: Account, amount: u64) {
        if amount > 0 {
            *self.numeraire.entry(to).or_default() += amount;
        }
    }

    pub fn transfer(
        &mut self,
        asset: &Asset,
        from: Account,
        to: Account,
        amount: u64,
    ) -> Result<()> {
        if let Asset::Token(t) = asset {
            if !self.supply.contains_key(t) {
                return Err(LedgerError::NotFound(format!("token {t}")));
            }
        }
        let available = self.balance(asset, from);
        if available < amount {
            return Err(LedgerError::InsufficientFunds {
                account: from,
                asset: asset.clone(),
                needed: amount,
                available,
            });
        }
        if amount == 0 || from == to {
            return Ok(());
        }
        let book = match asset {
            Asset::Numeraire => &mut self.numeraire,
            Asset::Token(t) => self
                .tokens
                .get_mut(t)
                .expect("holder of positive balance exists"),
        };
        let left = available - amount;
        if left == 0 {
            book.remove(&from);
        } else {
            book.insert(from, left);
        }
        *book.entry(to).or_default() += amount;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Membership {
    client: ClientId,
    minted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Scenario {
    spec: ScenarioSpec,
    members: Vec<Membership>,
}

/// Scenario registry (the logbook) plus the holdings it pays out against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLedger {
    logbook: Vec<ScenarioSpec>,
    scenarios: BTreeMap<ScenarioId, Scenario>,
    holdings: HoldingsLedger,
}

impl TokenLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn holdings(&self) -> &HoldingsLedger {
        &self.holdings
    }

    pub fn holdings_mut(&mut self) -> &mut HoldingsLedger {
        &mut self.holdings
    }

    pub fn register_scenario(&mut self, spec: ScenarioSpec) -> Result<ScenarioId> {
        spec.validate().map_err(LedgerError::InvalidArgument)?;
        if self.scenarios.contains_key(&spec.id) {
            return Err(LedgerError::Conflict(format!(
                "scenario {} already registered",
                spec.id
            )));
        }
        let id = spec.id.clone();
        self.logbook.push(spec.clone());
        self.scenarios.insert(
            id.clone(),
            Scenario {
                spec,
                members: Vec::new(),
            },
        );
        Ok(id)
    }

    pub fn scenario(&self, id: &ScenarioId) -> Option<&ScenarioSpec> {
        self.scenarios.get(id).map(|s| &s.spec)
    }

    /// All registered scenarios in registration order.
    pub fn logbook(&self) -> &[ScenarioSpec] {
        &self.logbook
    }

    pub fn is_member(&self, id: &ScenarioId, client: ClientId) -> bool {
        self.scenarios
            .get(id)
            .is_some_and(|s| s.members.iter().any(|m| m.client == client))
    }

    /// Joins `client` to the scenario and, if `mint`, credits the client
    /// with the full token supply. Returns the minted amount.
    pub fn join_scenario(&mut self, id: &ScenarioId, client: ClientId, mint: bool) -> Result<u64> {
        let scenario = self
            .scenarios
            .get_mut(id)
            .ok_or_else(|| LedgerError::NotFound(format!("scenario {id}")))?;
        if scenario.members.iter().any(|m| m.client == client) {
            return Err(LedgerError::Conflict(format!(
                "client {client} already joined {id}"
            )));
        }
        if client.0 >= scenario.spec.clients {
            return Err(LedgerError::InvalidArgument(format!(
                "client {client} outside scenario {id} with {} clients",
                scenario.spec.clients
            )));
        }
        let supply = scenario.spec.token_supply_per_client;
        scenario.members.push(Membership {
            client,
            minted: mint,
        });
        if !mint {
            return Ok(0);
        }
        self.holdings
            .mint(&TokenId::new(id, client), Account::Client(client.0), supply)?;
        Ok(supply)
    }

    /// Splits each client's reward across that client's token holders in
    /// proportion to holdings. Clients without a token are paid directly.
    pub fn distribute_reward(
        &mut self,
        id: &ScenarioId,
        round: u32,
        per_client_rewards: &BTreeMap<ClientId, u64>,
    ) -> Result<Vec<PayoutRecord>> {
        let records = self.plan_payouts(id, round, per_client_rewards)?;
        for r in &records {
            self.holdings.deposit(r.account, r.amount);
        }
        Ok(records)
    }

    /// The payouts [`distribute_reward`](Self::distribute_reward) would make,
    /// without applying them.
    pub fn plan_payouts(
        &self,
        id: &ScenarioId,
        round: u32,
        per_client_rewards: &BTreeMap<ClientId, u64>,
    ) -> Result<Vec<PayoutRecord>> {
        let scenario = self
            .scenarios
            .get(id)
            .ok_or_else(|| LedgerError::NotFound(format!("scenario {id}")))?;
        let mut records = Vec::new();
        for (&client, &reward) in per_client_rewards {
            let member = scenario
                .members
                .iter()
                .find(|m| m.client == client)
                .ok_or_else(|| {
                    LedgerError::NotFound(format!("client {client} in scenario {id}"))
                })?;
            if reward == 0 {
                continue;
            }
            let token = TokenId::new(id, client);
            if !member.minted {
                records.push(PayoutRecord {
                    round,
                    token,
                    account: Account::Client(client.0),
                    amount: reward,
                });
                continue;
            }
            let holders: Vec<(Account, u64)> = self.holdings.holders(&token).collect();
            let weights: Vec<u64> = holders.iter().map(|(_, b)| *b).collect();
            let amounts = apportion::by_weights(reward, &weights)
                .map_err(|e| LedgerError::InvalidArgument(format!("token {token}: {e}")))?;
            for ((account, _), amount) in holders.into_iter().zip(amounts) {
                if amount > 0 {
                    records.push(PayoutRecord {
                        round,
                        token: token.clone(),
                        account,
                        amount,
                    });
                }
            }
        }
        Ok(records)
    }

    pub fn transfer(
        &mut self,
        token: &TokenId,
        from: Account,
        to: Account,
        amount: u64,
    ) -> Result<()> {
        self.holdings
            .transfer(&Asset::Token(token.clone()), from, to, amount)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str, supply: u64) -> ScenarioSpec {
        ScenarioSpec {
            id: ScenarioId(id.into()),
            use_case: "test".into(),
            reward: RewardSchedule::PreEstablished {
                total: 1000,
                rounds: 10,
            },
            clients: 3,
            aggregation: "fedavg".into(),
            incentive: IncentiveMethod::Equal,
            token_supply_per_client: supply,
            metadata: BTreeMap::new(),
        }
    }

    fn rewards(pairs: &[(u32, u64)]) -> BTreeMap<ClientId, u64> {
        pairs.iter().map(|&(c, r)| (ClientId(c), r)).collect()
    }

    #[test]
    fn register_and_lookup() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("a", 100)).unwrap();
        assert_eq!(l.scenario(&id), Some(&spec("a", 100)));
        assert!(matches!(
            l.register_scenario(spec("a", 5)),
            Err(LedgerError::Conflict(_))
        ));
        l.register_scenario(spec("b", 100)).unwrap();
        let ids: Vec<_> = l.logbook().iter().map(|s| s.id.0.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut l = TokenLedger::new();
        let mut s = spec("a", 100);
        s.reward = RewardSchedule::PreEstablished {
            total: 0,
            rounds: 3,
        };
        assert!(matches!(
            l.register_scenario(s),
            Err(LedgerError::InvalidArgument(_))
        ));
        assert!(l.register_scenario(spec("a/b", 1)).is_err());
        assert!(l.register_scenario(spec("a", 0)).is_err());
    }

    #[test]
    fn join_mints_to_client() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 1000)).unwrap();
        assert_eq!(l.join_scenario(&id, ClientId(0), true).unwrap(), 1000);
        let t = TokenId::new(&id, ClientId(0));
        assert_eq!(l.holdings().token_balance(&t, Account::Client(0)), 1000);
        assert_eq!(l.holdings().supply(&t), Some(1000));
        assert!(matches!(
            l.join_scenario(&id, ClientId(0), true),
            Err(LedgerError::Conflict(_))
        ));
        assert!(matches!(
            l.join_scenario(&ScenarioId("x".into()), ClientId(0), true),
            Err(LedgerError::NotFound(_))
        ));
    }

    #[test]
    fn unminted_client_paid_directly() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 1000)).unwrap();
        assert_eq!(l.join_scenario(&id, ClientId(1), false).unwrap(), 0);
        let recs = l.distribute_reward(&id, 1, &rewards(&[(1, 77)])).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].account, Account::Client(1));
        assert_eq!(recs[0].amount, 77);
        assert_eq!(l.holdings().numeraire_balance(Account::Client(1)), 77);
    }

    #[test]
    fn pro_rata_payouts() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 1000)).unwrap();
        l.join_scenario(&id, ClientId(0), true).unwrap();
        let t = TokenId::new(&id, ClientId(0));
        l.transfer(&t, Account::Client(0), Account::Investor(0), 400)
            .unwrap();
        let recs = l.distribute_reward(&id, 1, &rewards(&[(0, 100)])).unwrap();
        let amounts: Vec<_> = recs.iter().map(|r| (r.account, r.amount)).collect();
        assert_eq!(
            amounts,
            vec![(Account::Client(0), 60), (Account::Investor(0), 40)]
        );
    }

    #[test]
    fn three_equal_holders_remainder_to_lowest_id() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 300)).unwrap();
        l.join_scenario(&id, ClientId(0), true).unwrap();
        let t = TokenId::new(&id, ClientId(0));
        l.transfer(&t, Account::Client(0), Account::Investor(2), 100)
            .unwrap();
        l.transfer(&t, Account::Client(0), Account::Investor(1), 100)
            .unwrap();
        let recs = l.distribute_reward(&id, 1, &rewards(&[(0, 100)])).unwrap();
        let amounts: Vec<_> = recs.iter().map(|r| (r.account, r.amount)).collect();
        assert_eq!(
            amounts,
            vec![
                (Account::Client(0), 34),
                (Account::Investor(1), 33),
                (Account::Investor(2), 33)
            ]
        );
    }

    #[test]
    fn zero_reward_pays_nothing() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 10)).unwrap();
        l.join_scenario(&id, ClientId(0), true).unwrap();
        assert!(l
            .distribute_reward(&id, 1, &rewards(&[(0, 0)]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_client_payout_is_atomic() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 10)).unwrap();
        l.join_scenario(&id, ClientId(0), true).unwrap();
        let before = l.clone();
        assert!(matches!(
            l.distribute_reward(&id, 1, &rewards(&[(0, 5), (9, 5)])),
            Err(LedgerError::NotFound(_))
        ));
        assert_eq!(l, before);
    }

    #[test]
    fn transfers() {
        let mut l = TokenLedger::new();
        let id = l.register_scenario(spec("s", 10)).unwrap();
        l.join_scenario(&id, ClientId(0), true).unwrap();
        let t = TokenId::new(&id, ClientId(0));
        let before = l.clone();
        l.transfer(&t, Account::Client(0), Account::Investor(0), 0)
            .unwrap();
        assert_eq!(l, before);
        assert!(matches!(
            l.transfer(&t, Account::Client(0), Account::Investor(0), 11),
            Err(LedgerError::InsufficientFunds {
                needed: 11,
                available: 10,
                ..
            })
        ));
        assert_eq!(l, before);
        l.transfer(&t, Account::Client(0), Account::Investor(0), 10)
            .unwrap();
        assert_eq!(l.holdings().token_balance(&t, Account::Client(0)), 0);
        assert_eq!(l.holdings().token_balance(&t, Account::Investor(0)), 10);
        assert_eq!(l.holdings().circulating(&t), 10);
    }

    #[test]
    fn schedule_installments() {
        let s = RewardSchedule::PreEstablished {
            total: 10,
            rounds: 3,
        };
        let per: Vec<_> = (1..=3).map(|t| s.round_reward(t)).collect();
        assert_eq!(per, vec![4, 3, 3]);
        assert_eq!(s.round_reward(0), 0);
        assert_eq!(s.round_reward(4), 0);
        let p = RewardSchedule::PerRound {
            amounts: vec![5, 0, 9],
        };
        assert_eq!((p.rounds(), p.total(), p.round_reward(3)), (3, 14, 9));
    }

    #[test]
    fn id_strings_round_trip() {
        let t: TokenId = "scen/4".parse().unwrap();
        assert_eq!(t.to_string(), "scen/4");
        for a in [
            Account::Client(3),
            Account::Investor(0),
            Account::Pool,
            Account::LiquidityProvider,
        ] {
            assert_eq!(a.to_string().parse::<Account>().unwrap(), a);
        }
        assert_eq!("numeraire".parse::<Asset>().unwrap(), Asset::Numeraire);
        assert!("nobody".parse::<Account>().is_err());
    }
}
