use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{ClientPolicy, InvestorPolicy};
use crate::amm::Curve;
use crate::fl::{SyntheticSpec, TrainConfig};
use crate::ledger::{RewardSchedule, ScenarioSpec};

use super::SimError;

/// Training and synthetic-data parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    pub samples_per_client: usize,
    pub test_samples: usize,
    pub classes: usize,
    pub features: usize,
    pub dirichlet_alpha: f64,
    pub class_separation: f64,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmmConfig {
    pub curve: Curve,
    /// Tokens each minting client moves into the pool at setup. The matching
    /// numeraire side is deposited by the liquidity-provider account at the
    /// initial fair value.
    pub client_seed_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationConfig {
    /// Earnings multiple for schedules without a fixed total.
    #[serde(default = "default_multiple")]
    pub earnings_multiple: f64,
    #[serde(default = "default_window")]
    pub trailing_window: usize,
}

fn default_multiple() -> f64 {
    5.0
}

fn default_window() -> usize {
    crate::valuation::DEFAULT_TRAILING_WINDOW
}

impl Default for ValuationConfig {
    fn default() -> Self {
        Self {
            earnings_multiple: default_multiple(),
            trailing_window: default_window(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    /// One policy per client, in client-id order. Empty means every client
    /// mints and holds.
    #[serde(default)]
    pub clients: Vec<ClientPolicy>,
    #[serde(default)]
    pub investors: Vec<InvestorPolicy>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// One experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub federation: FederationConfig,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub amm: Option<AmmConfig>,
    #[serde(default)]
    pub valuation: ValuationConfig,
    #[serde(default)]
    pub agents: AgentsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn clients(&self) -> usize {
        self.scenario.clients as usize
    }

    /// Policy of client `i`, defaulting to mint-and-hold.
    pub fn client_policy(&self, i: usize) -> ClientPolicy {
        self.agents.clients.get(i).cloned().unwrap_or_default()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            local_epochs: self.federation.local_epochs,
            batch_size: self.federation.batch_size,
            learning_rate: self.federation.learning_rate,
            rounds: self.federation.rounds,
            seed: self.seed,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            clients: self.clients(),
            samples_per_client: self.federation.samples_per_client,
            test_samples: self.federation.test_samples,
            classes: self.federation.classes,
            features: self.federation.features,
            dirichlet_alpha: self.federation.dirichlet_alpha,
            class_separation: self.federation.class_separation,
            seed: self.seed,
        }
    }
}

/// Every broken invariant or cross-field inconsistency; empty when valid.
pub fn validate_config(config: &SimConfig) -> Vec<String> {
    let mut v = Vec::new();
    let f = &config.federation;
    if !(f.learning_rate.is_finite() && f.learning_rate > 0.0) {
        v.push(format!(
            "federation.learning_rate = {} must be > 0",
            f.learning_rate
        ));
    }
    for (name, value) in [
        ("federation.samples_per_client", f.samples_per_client),
        ("federation.test_samples", f.test_samples),
        ("federation.features", f.features),
        ("federation.local_epochs", f.local_epochs),
        ("federation.batch_size", f.batch_size),
        ("federation.rounds", f.rounds),
    ] {
        if value == 0 {
            v.push(format!("{name} must be >= 1"));
        }
    }
    if f.classes < 2 {
        v.push(format!("federation.classes = {} must be >= 2", f.classes));
    }
    if !(f.dirichlet_alpha.is_finite() && f.dirichlet_alpha > 0.0) {
        v.push(format!(
            "federation.dirichlet_alpha = {} must be > 0",
            f.dirichlet_alpha
        ));
    }
    if !(f.class_separation.is_finite() && f.class_separation >= 0.0) {
        v.push(format!(
            "federation.class_separation = {} must be >= 0",
            f.class_separation
        ));
    }

    if let Err(e) = config.scenario.validate() {
        v.push(e);
    }
    if config.clients() > crate::contribution::MAX_SHAPLEY_CLIENTS
        && config.scenario.incentive == crate::contribution::IncentiveMethod::Shapley
    {
        v.push(format!(
            "scenario.clients = {} exceeds the exact Shapley cap of {}",
            config.scenario.clients,
            crate::contribution::MAX_SHAPLEY_CLIENTS
        ));
    }
    let schedule_rounds = config.scenario.reward.rounds() as usize;
    if schedule_rounds != f.rounds {
        let field = match config.scenario.reward {
            RewardSchedule::PreEstablished { .. } => "scenario.reward.rounds",
            RewardSchedule::PerRound { .. } => "len(scenario.reward.amounts)",
        };
        v.push(format!(
            "{field} = {schedule_rounds} does not match federation.rounds = {}",
            f.rounds
        ));
    }
    if !config.agents.clients.is_empty() && config.agents.clients.len() != config.clients() {
        v.push(format!(
            "scenario.clients = {} does not match len(agents.clients) = {}",
            config.scenario.clients,
            config.agents.clients.len()
        ));
    }
    for (i, p) in config.agents.clients.iter().enumerate() {
        v.extend(p.violations(&format!("agents.clients[{i}]")));
        if let Some(inv) = &p.investor {
            v.extend(target_violations(
                &inv.targets,
                config.clients(),
                &format!("agents.clients[{i}].investor"),
            ));
        }
    }
    for (i, p) in config.agents.investors.iter().enumerate() {
        let path = format!("agents.investors[{i}]");
        v.extend(p.violations(&path));
        v.extend(target_violations(&p.targets, config.clients(), &path));
    }

    let minting = (0..config.clients())
        .filter(|&i| config.client_policy(i).mint)
        .count();
    match &config.amm {
        Some(amm) => {
            if amm.client_seed_tokens == 0 {
                v.push("amm.client_seed_tokens must be >= 1 when an amm is configured".into());
            }
            if amm.client_seed_tokens >= config.scenario.token_supply_per_client {
                v.push(format!(
                    "amm.client_seed_tokens = {} must be below scenario.token_supply_per_client = {}",
                    amm.client_seed_tokens, config.scenario.token_supply_per_client
                ));
            }
            if minting == 0 {
                v.push("amm is configured but no client mints a token".into());
            }
        }
        None => {
            let trades = config.agents.clients.iter().any(|p| {
                p.sell_fraction_at_join > 0.0
                    || p.per_round_sell_fraction > 0.0
                    || p.investor.is_some()
            });
            if trades || !config.agents.investors.is_empty() {
                v.push("agents trade but no amm is configured".into());
            }
        }
    }
    if !(config.valuation.earnings_multiple.is_finite() && config.valuation.earnings_multiple > 0.0)
    {
        v.push("valuation.earnings_multiple must be > 0".into());
    }
    if config.valuation.trailing_window == 0 {
        v.push("valuation.trailing_window must be >= 1".into());
    }
    v
}

fn target_violations(targets: &[u32], clients: usize, path: &str) -> Vec<String> {
    targets
        .iter()
        .filter(|&&t| t as usize >= clients)
        .map(|t| format!("{path}.targets names client {t} but scenario.clients = {clients}"))
        .collect()
}
