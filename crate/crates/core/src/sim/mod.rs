//! The per-round pipeline: FL round, contribution assessment, reward
//! emission, pro-rata payout, then a trading phase on the AMM.
//!
//! Round 0 is the setup round (registration, joins, pool seeding and the
//! join-time token sales). Rounds `1..=T` each train, pay and trade. Every
//! state change is appended to the [`EventLog`], which is enough to rebuild
//! the final ledger and pool (see [`replay`]).

mod config;
mod events;
mod export;
mod replay;

use std::collections::BTreeMap;

use thiserror::Error;

pub use config::{
    validate_config, AgentsConfig, AmmConfig, FederationConfig, OutputConfig, SimConfig,
    ValuationConfig,
};
pub use events::{Event, EventKind, EventLog, PriceRow};
pub use export::{export_csv, write_final_state, OUTPUT_FILES};
pub use replay::{replay, ReplayReport};

use crate::agents::{client_act, investor_act, ClientView, InvestorPolicy, InvestorView};
use crate::amm::{self, AmmError, Curve, Pool, TradeOrder, INVARIANT_TOLERANCE};
use crate::apportion;
use crate::contribution::{self, Coalition, ContributionVector, IncentiveMethod, UtilityOracle};
use crate::fl::{self, Dataset, ModelParams};
use crate::ledger::{Account, Asset, ClientId, RewardSchedule, ScenarioId, TokenId, TokenLedger};
use crate::rng;
use crate::valuation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("simulation failed: {0}")]
    Runtime(String),
}

impl SimError {
    /// CLI exit code: 2 for invariant violations, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Invariant(_) => 2,
            _ => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> SimError {
    SimError::Runtime(e.to_string())
}

/// Ledger and pool at the end of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FinalState {
    pub ledger: TokenLedger,
    pub pool: Option<Pool>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub log: EventLog,
    pub final_state: FinalState,
    /// Test accuracy of the final global model.
    pub final_accuracy: f64,
}

impl SimOutcome {
    /// Numeraire each client received through payouts over the whole run.
    pub fn client_income(&self, clients: usize) -> Vec<u64> {
        let mut income = vec![0u64; clients];
        for e in self.log.events() {
            if let EventKind::PayoutExecuted { records } = &e.kind {
                for r in records {
                    if let Account::Client(i) = r.account {
                        income[i as usize] += r.amount;
                    }
                }
            }
        }
        income
    }

    /// Per-round contribution shares, indexed by round - 1.
    pub fn round_shares(&self) -> Vec<Vec<f64>> {
        self.log
            .events()
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::ContributionComputed { shares, .. } => Some(shares.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Fair value of every listed token after `round` payouts.
pub(crate) fn fair_values(
    spec: &crate::ledger::ScenarioSpec,
    valuation_cfg: &ValuationConfig,
    tokens: &[TokenId],
    history: &BTreeMap<TokenId, Vec<f64>>,
    round: u32,
) -> Result<BTreeMap<TokenId, f64>, SimError> {
    let n = spec.clients;
    let supply = spec.token_supply_per_client;
    let mut out = BTreeMap::new();
    for t in tokens {
        let v = match &spec.reward {
            RewardSchedule::PreEstablished { total, rounds } => {
                valuation::fair_token_value(*total as f64, *rounds, round, n, supply)
                    .map_err(runtime)?
            }
            RewardSchedule::PerRound { amounts } => {
                if round >= amounts.len() as u32 {
                    0.0
                } else {
                    match history.get(t).filter(|h| !h.is_empty()) {
                        Some(h) => valuation::open_ended_value(
                            h,
                            valuation_cfg.earnings_multiple,
                            valuation_cfg.trailing_window,
                        )
                        .map_err(runtime)?,
                        None => {
                            let first = amounts[0] as f64 / (n as f64 * supply as f64);
                            first * valuation_cfg.earnings_multiple
                        }
                    }
                }
            }
        };
        out.insert(t.clone(), v);
    }
    Ok(out)
}

struct Simulation<'a> {
    config: &'a SimConfig,
    scenario: ScenarioId,
    ledger: TokenLedger,
    pool: Option<Pool>,
    log: EventLog,
    /// Tokens of minting clients, by client id.
    tokens: BTreeMap<u32, TokenId>,
    /// Realized per-token-unit payouts, for trailing-earnings valuation.
    history: BTreeMap<TokenId, Vec<f64>>,
    deposited: u128,
    emitted: u128,
    paid: u128,
}

impl<'a> Simulation<'a> {
    fn listed(&self) -> Vec<TokenId> {
        self.tokens.values().cloned().collect()
    }

    fn fair_values(&self, round: u32) -> Result<BTreeMap<TokenId, f64>, SimError> {
        fair_values(
            &self.config.scenario,
            &self.config.valuation,
            &self.listed(),
            &self.history,
            round,
        )
    }

    fn deposit(&mut self, account: Account, amount: u64) {
        if amount == 0 {
            return;
        }
        self.ledger.holdings_mut().deposit(account, amount);
        self.deposited += amount as u128;
        self.log.push(0, EventKind::Deposit { account, amount });
    }

    fn transfer(
        &mut self,
        asset: Asset,
        from: Account,
        to: Account,
        amount: u64,
    ) -> Result<(), SimError> {
        self.ledger
            .holdings_mut()
            .transfer(&asset, from, to, amount)
            .map_err(runtime)?;
        self.log.push(
            0,
            EventKind::Transfer {
                asset,
                from,
                to,
                amount,
            },
        );
        Ok(())
    }

    fn setup(&mut self) -> Result<(), SimError> {
        let spec = self.config.scenario.clone();
        self.ledger
            .register_scenario(spec.clone())
            .map_err(runtime)?;
        self.log.push(0, EventKind::ScenarioRegistered { spec });
        for i in 0..self.config.clients() {
            let client = ClientId(i as u32);
            let mint = self.config.client_policy(i).mint;
            let minted = self
                .ledger
                .join_scenario(&self.scenario, client, mint)
                .map_err(runtime)?;
            if mint {
                self.tokens
                    .insert(i as u32, TokenId::new(&self.scenario, client));
            }
            self.log.push(0, EventKind::ClientJoined { client, minted });
        }
        for (i, inv) in self.config.agents.investors.iter().enumerate() {
            self.deposit(Account::Investor(i as u32), inv.budget);
        }
        if let Some(amm_cfg) = self.config.amm.clone() {
            self.seed_pool(&amm_cfg)?;
        }
        Ok(())
    }

    /// Lists every minted token at its initial fair value. Clients seed the
    /// token side; the liquidity provider deposits the numeraire side.
    fn seed_pool(&mut self, amm_cfg: &AmmConfig) -> Result<(), SimError> {
        let fair = self.fair_values(0)?;
        let seed = amm_cfg.client_seed_tokens;
        let listed = self.listed();
        let values: Vec<f64> = listed.iter().map(|t| fair[t] * seed as f64).collect();
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(SimError::Config(vec![
                "initial fair token value must be positive to seed the pool".into(),
            ]));
        }
        let numeraire_value = match amm_cfg.curve {
            // A shared numeraire reserve prices every token at x_num / x_token.
            Curve::Product => values[0],
            Curve::Sum | Curve::ConstantMean => values.iter().sum(),
        };
        let numeraire = numeraire_value.ceil() as u64;
        self.deposit(Account::LiquidityProvider, numeraire);
        self.transfer(
            Asset::Numeraire,
            Account::LiquidityProvider,
            Account::Pool,
            numeraire,
        )?;
        for t in &listed {
            self.transfer(
                Asset::Token(t.clone()),
                Account::Client(t.client.0),
                Account::Pool,
                seed,
            )?;
        }
        let mut assets = vec![Asset::Numeraire];
        assets.extend(listed.iter().cloned().map(Asset::Token));
        let mut balances = vec![numeraire as f64];
        balances.extend(listed.iter().map(|_| seed as f64));
        let weights = match amm_cfg.curve {
            Curve::ConstantMean => {
                let total = numeraire as f64 + values.iter().sum::<f64>();
                let mut w = vec![numeraire as f64 / total];
                w.extend(values.iter().map(|v| v / total));
                w
            }
            _ => vec![1.0 / assets.len() as f64; assets.len()],
        };
        let pool = amm::create_pool(
            assets.clone(),
            balances.clone(),
            weights.clone(),
            amm_cfg.curve,
        )
        .map_err(|e| SimError::Config(vec![format!("cannot create pool: {e}")]))?;
        self.log.push(
            0,
            EventKind::PoolCreated {
                assets,
                balances,
                weights,
                curve: amm_cfg.curve,
            },
        );
        self.pool = Some(pool);
        Ok(())
    }

    fn execute(&mut self, round: u32, trader: Account, order: TradeOrder) -> Result<(), SimError> {
        let pool = self.pool.as_mut().expect("orders only exist with a pool");
        match amm::swap(pool, &order, self.ledger.holdings_mut(), trader) {
            Ok(trade) => {
                let dust = trade.quoted_out - trade.amount_out as f64;
                if !(0.0..1.0).contains(&dust) {
                    return Err(SimError::Invariant(format!(
                        "settlement dust {dust} is not below one unit"
                    )));
                }
                self.log.push(round, EventKind::TradeExecuted { trade });
            }
            Err(AmmError::Invariant(msg)) => return Err(SimError::Invariant(msg)),
            Err(e) => self.log.push(
                round,
                EventKind::OrderRejected {
                    trader,
                    order,
                    reason: e.to_string(),
                },
            ),
        }
        Ok(())
    }

    fn investor_turn(
        &mut self,
        round: u32,
        account: Account,
        policy: &InvestorPolicy,
        exclude: Option<u32>,
        fair: &BTreeMap<TokenId, f64>,
    ) -> Result<(), SimError> {
        let targets: Vec<TokenId> = self
            .tokens
            .iter()
            .filter(|(c, _)| policy.targets.is_empty() || policy.targets.contains(c))
            .filter(|(c, _)| Some(**c) != exclude)
            .map(|(_, t)| t.clone())
            .collect();
        let label = match account {
            Account::Client(i) => i as u64,
            Account::Investor(i) => 1 << 32 | i as u64,
            _ => u64::MAX,
        };
        let orders = {
            let view = InvestorView {
                account,
                round,
                first_round: round == 0,
                seed: rng::derive(self.config.seed, &[rng::tag::NOISE_AGENT, label]),
                pool: self.pool.as_ref().expect("trading needs a pool"),
                fair_values: fair,
                holdings: self.ledger.holdings(),
                targets: &targets,
            };
            investor_act(policy, &view)
        };
        for order in orders {
            self.execute(round, account, order)?;
        }
        Ok(())
    }

    /// Clients first, then investors, each in ascending id order. Every
    /// agent sees the prices left by the agents before it.
    fn trading_phase(&mut self, round: u32) -> Result<(), SimError> {
        if self.pool.is_none() {
            return Ok(());
        }
        let fair = self.fair_values(round)?;
        let supply = self.config.scenario.token_supply_per_client;
        for i in 0..self.config.clients() {
            let policy = self.config.client_policy(i);
            if let Some(token) = self.tokens.get(&(i as u32)).cloned() {
                let view = ClientView {
                    token: &token,
                    join_round: round == 0,
                    holdings: self
                        .ledger
                        .holdings()
                        .token_balance(&token, Account::Client(i as u32)),
                    supply,
                };
                for order in client_act(&policy, &view) {
                    self.execute(round, Account::Client(i as u32), order)?;
                }
            }
            if let Some(inv) = &policy.investor {
                self.investor_turn(round, Account::Client(i as u32), inv, Some(i as u32), &fair)?;
            }
        }
        for (i, inv) in self.config.agents.investors.iter().enumerate() {
            self.investor_turn(round, Account::Investor(i as u32), inv, None, &fair)?;
        }
        Ok(())
    }

    fn observe_prices(&mut self, round: u32) -> Result<(), SimError> {
        let fair = self.fair_values(round)?;
        let prices = fair
            .into_iter()
            .map(|(token, fair_value)| {
                let spot_price = match &self.pool {
                    Some(p) => Some(
                        p.spot_price(&Asset::Token(token.clone()))
                            .map_err(runtime)?,
                    ),
                    None => None,
                };
                Ok(PriceRow {
                    token,
                    spot_price,
                    fair_value,
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        self.log.push(round, EventKind::PricesObserved { prices });
        Ok(())
    }

    fn shares(
        &self,
        global_before: &ModelParams,
        fed: &fl::Federation,
        updates: &[ModelParams],
    ) -> Result<(ContributionVector, Option<Vec<f64>>), SimError> {
        let n = fed.clients.len();
        let sizes: Vec<u64> = fed.clients.iter().map(|c| c.len() as u64).collect();
        match self.config.scenario.incentive {
            IncentiveMethod::Equal => Ok((contribution::equal_shares(n).map_err(runtime)?, None)),
            IncentiveMethod::Linear => {
                let q: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
                Ok((contribution::linear_shares(&q).map_err(runtime)?, None))
            }
            IncentiveMethod::Performance => {
                let u = updates
                    .iter()
                    .map(|m| fl::evaluate(m, &fed.test))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(runtime)?;
                Ok((contribution::performance_shares(&u).map_err(runtime)?, None))
            }
            IncentiveMethod::Shapley => {
                let baseline = fl::evaluate(global_before, &fed.test).map_err(runtime)?;
                let test: &Dataset = &fed.test;
                let oracle = UtilityOracle::new(n, |s: Coalition| {
                    if s.is_empty() {
                        return baseline;
                    }
                    contribution::subset_model(updates, &sizes, s)
                        .ok()
                        .and_then(|m| fl::evaluate(&m, test).ok())
                        .unwrap_or(f64::NAN)
                })
                .map_err(runtime)?;
                let phi = contribution::shapley_values(&oracle).map_err(runtime)?;
                if phi.iter().any(|v| !v.is_finite()) {
                    return Err(SimError::Invariant(
                        "a coalition utility could not be evaluated".into(),
                    ));
                }
                let shares = contribution::normalize_to_shares(&phi).map_err(runtime)?;
                Ok((shares, Some(phi)))
            }
        }
    }

    fn check_invariants(&self, round: u32) -> Result<(), SimError> {
        check_books(
            self.ledger.holdings(),
            self.deposited,
            self.emitted,
            self.paid,
            round,
        )?;
        if let Some(pool) = &self.pool {
            check_pool(pool, self.ledger.holdings())?;
        }
        Ok(())
    }
}

/// Reward, token-supply and numeraire conservation.
pub(crate) fn check_books(
    h: &crate::ledger::HoldingsLedger,
    deposited: u128,
    emitted: u128,
    paid: u128,
    round: u32,
) -> Result<(), SimError> {
    if emitted != paid {
        return Err(SimError::Invariant(format!(
            "reward conservation: emitted {emitted} but paid {paid} by round {round}"
        )));
    }
    for t in h.tokens() {
        let supply = h.supply(t).unwrap_or(0) as u128;
        if h.circulating(t) != supply {
            return Err(SimError::Invariant(format!(
                "supply conservation: token {t} has {} in accounts, minted {supply}",
                h.circulating(t)
            )));
        }
    }
    if h.total_numeraire() != deposited + paid {
        return Err(SimError::Invariant(format!(
            "numeraire conservation: ledger holds {}, deposits {deposited} + payouts {paid}",
            h.total_numeraire()
        )));
    }
    Ok(())
}

/// Pool invariant within tolerance, and the pool's ledger account backs
/// every real-valued reserve.
pub(crate) fn check_pool(
    pool: &Pool,
    holdings: &crate::ledger::HoldingsLedger,
) -> Result<(), SimError> {
    let drift = pool.invariant_drift();
    if drift.is_nan() || drift > INVARIANT_TOLERANCE {
        return Err(SimError::Invariant(format!(
            "pool invariant drifted by {drift:e}"
        )));
    }
    for (asset, reserve) in pool.assets().iter().zip(pool.balances()) {
        let held = holdings.balance(asset, Account::Pool) as f64;
        if held < reserve - 1e-6 * reserve.max(1.0) {
            return Err(SimError::Invariant(format!(
                "pool account holds {held} {asset} but reserve is {reserve}"
            )));
        }
    }
    Ok(())
}

/// Runs the configured experiment end to end.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutcome, SimError> {
    let violations = validate_config(config);
    if !violations.is_empty() {
        return Err(SimError::Config(violations));
    }
    let fed = fl::generate_synthetic_federation(&config.synthetic_spec()).map_err(runtime)?;
    let train = config.train_config();
    let mut sim = Simulation {
        config,
        scenario: config.scenario.id.clone(),
        ledger: TokenLedger::new(),
        pool: None,
        log: EventLog::new(),
        tokens: BTreeMap::new(),
        history: BTreeMap::new(),
        deposited: 0,
        emitted: 0,
        paid: 0,
    };
    sim.setup()?;
    sim.trading_phase(0)?;
    sim.observe_prices(0)?;
    sim.check_invariants(0)?;

    let mut global = fl::init_model(
        config.federation.features,
        config.federation.classes,
        config.seed,
    )
    .map_err(runtime)?;
    let supply = config.scenario.token_supply_per_client as f64;
    for round in 1..=config.federation.rounds as u32 {
        sim.log.push(round, EventKind::RoundStarted);
        let out = fl::run_round(&global, &fed.clients, &train.for_round(round as u64))
            .map_err(runtime)?;
        let utility = fl::evaluate(&out.global, &fed.test).map_err(runtime)?;
        sim.log.push(round, EventKind::ModelAggregated { utility });

        let (shares, shapley) = sim.shares(&global, &fed, &out.updates)?;
        sim.log.push(
            round,
            EventKind::ContributionComputed {
                shares: shares.shares().to_vec(),
                shapley,
            },
        );

        let total = config.scenario.reward.round_reward(round);
        let amounts = apportion::by_shares(total, shares.shares()).map_err(runtime)?;
        let rewards: BTreeMap<ClientId, u64> = amounts
            .iter()
            .enumerate()
            .map(|(i, &a)| (ClientId(i as u32), a))
            .collect();
        sim.emitted += total as u128;
        sim.log.push(
            round,
            EventKind::RewardEmitted {
                total,
                amounts: rewards.iter().map(|(c, a)| (*c, *a)).collect(),
            },
        );

        let records = sim
            .ledger
            .distribute_reward(&sim.scenario, round, &rewards)
            .map_err(runtime)?;
        sim.paid += records.iter().map(|r| r.amount as u128).sum::<u128>();
        for (client, amount) in &rewards {
            if let Some(t) = sim.tokens.get(&client.0) {
                sim.history
                    .entry(t.clone())
                    .or_default()
                    .push(*amount as f64 / supply);
            }
        }
        sim.log.push(round, EventKind::PayoutExecuted { records });

        sim.trading_phase(round)?;
        sim.observe_prices(round)?;
        sim.check_invariants(round)?;
        global = out.global;
    }
    let final_accuracy = fl::evaluate(&global, &fed.test).map_err(runtime)?;
    Ok(SimOutcome {
        log: sim.log,
        final_state: FinalState {
            ledger: sim.ledger,
            pool: sim.pool,
        },
        final_accuracy,
    })
}
