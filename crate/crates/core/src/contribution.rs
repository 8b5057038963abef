//! Per-round reward shares: equal, linear, performance-based and exact
//! Shapley values over client coalitions.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fl::{self, FlError, ModelParams};

/// Largest federation for which exact Shapley enumeration is allowed
/// (2^12 = 4096 coalition evaluations).
pub const MAX_SHAPLEY_CLIENTS: usize = 12;

const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContributionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{clients} clients exceed the exact Shapley cap of {cap}")]
    Capacity { clients: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] FlError),
}

pub type Result<T> = std::result::Result<T, ContributionError>;

/// Non-negative reward shares summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContributionVector(Vec<f64>);

impl ContributionVector {
    /// Wraps shares that already satisfy the invariants.
    pub fn new(shares: Vec<f64>) -> Result<Self> {
        if shares.is_empty() {
            return Err(ContributionError::InvalidArgument("no shares".into()));
        }
        if shares.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(ContributionError::InvalidArgument(
                "shares must be finite and >= 0".into(),
            ));
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > SHARE_TOLERANCE {
            return Err(ContributionError::InvalidArgument(format!(
                "shares sum to {sum}, not 1"
            )));
        }
        Ok(Self(shares))
    }

    pub fn shares(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn proportional(values: &[f64]) -> Self {
        let sum: f64 = values.iter().sum();
        Self(values.iter().map(|v| v / sum).collect())
    }
}

/// Which incentive model turns a round into shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncentiveMethod {
    Equal,
    Linear,
    Performance,
    Shapley,
}

pub fn equal_shares(n: usize) -> Result<ContributionVector> {
    if n == 0 {
        return Err(ContributionError::InvalidArgument(
            "equal shares need n >= 1".into(),
        ));
    }
    Ok(ContributionVector(vec![1.0 / n as f64; n]))
}

/// Shares proportional to a per-client quantity such as dataset size.
pub fn linear_shares(quantities: &[f64]) -> Result<ContributionVector> {
    if quantities.is_empty() {
        return Err(ContributionError::InvalidArgument("no quantities".into()));
    }
    if quantities.iter().any(|q| !q.is_finite() || *q < 0.0) {
        return Err(ContributionError::InvalidArgument(
            "quantities must be finite and >= 0".into(),
        ));
    }
    if quantities.iter().all(|&q| q == 0.0) {
        return Err(ContributionError::Degenerate(
            "all quantities are zero".into(),
        ));
    }
    Ok(ContributionVector::proportional(quantities))
}

/// Shares proportional to each client's utility above the worst client's.
pub fn performance_shares(per_client_utilities: &[f64]) -> Result<ContributionVector> {
    if per_client_utilities.is_empty() {
        return Err(ContributionError::InvalidArgument("no utilities".into()));
    }
    if per_client_utilities.iter().any(|u| !u.is_finite()) {
        return Err(ContributionError::InvalidArgument(
            "utilities must be finite".into(),
        ));
    }
    let min = per_client_utilities
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = per_client_utilities.iter().map(|u| u - min).collect();
    if shifted.iter().all(|&s| s == 0.0) {
        return equal_shares(shifted.len());
    }
    Ok(ContributionVector::proportional(&shifted))
}

/// Clips negative values to zero and renormalizes; all non-positive input
/// falls back to equal shares.
pub fn normalize_to_shares(phi: &[f64]) -> Result<ContributionVector> {
    if phi.is_empty() {
        return Err(ContributionError::InvalidArgument("no values".into()));
    }
    let clipped: Vec<f64> = phi
        .iter()
        .map(|&v| if v.is_finite() && v > 0.0 { v } else { 0.0 })
        .collect();
    if clipped.iter().all(|&v| v == 0.0) {
        return equal_shares(phi.len());
    }
    Ok(ContributionVector::proportional(&clipped))
}

/// A set of client indices as a bitmask; bit `i` is client `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(n: usize) -> Self {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn from_members(members: &[usize]) -> Self {
        Coalition(members.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | (1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }
}

/// Memoizing coalition utility. Each coalition's value is computed at most
/// once; concurrent fills of the same slot agree because the evaluator is
/// deterministic.
pub struct UtilityOracle<F> {
    evaluator: F,
    client_count: usize,
    cache: Vec<OnceLock<f64>>,
    evaluations: AtomicUsize,
}

impl<F> UtilityOracle<F>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    pub fn new(client_count: usize, evaluator: F) -> Result<Self> {
        if client_count == 0 {
            return Err(ContributionError::InvalidArgument(
                "oracle needs >= 1 client".into(),
            ));
        }
        if client_count > MAX_SHAPLEY_CLIENTS {
            return Err(ContributionError::Capacity {
                clients: client_count,
                cap: MAX_SHAPLEY_CLIENTS,
            });
        }
        Ok(Self {
            evaluator,
            client_count,
            cache: (0..1usize << client_count)
                .map(|_| OnceLock::new())
                .collect(),
            evaluations: AtomicUsize::new(0),
        })
    }

    pub fn client_count(&self) -> usize {
        self.client_count
    }

    pub fn utility(&self, s: Coalition) -> f64 {
        *self.cache[s.0 as usize].get_or_init(|| {
            self.evaluations.fetch_add(1, Ordering::Relaxed);
            (self.evaluator)(s)
        })
    }

    /// How many times the evaluator has actually run.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

/// Exact Shapley values by subset enumeration:
/// `phi_i = sum over S not containing i of |S|!(n-|S|-1)!/n! * (f(S+i) - f(S))`.
pub fn shapley_values<F>(oracle: &UtilityOracle<F>) -> Result<Vec<f64>>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    let n = oracle.client_count();
    if n > MAX_SHAPLEY_CLIENTS {
        return Err(ContributionError::Capacity {
            clients: n,
            cap: MAX_SHAPLEY_CLIENTS,
        });
    }
    let subsets = 1u32 << n;
    let utilities: Vec<f64> = (0..subsets)
        .into_par_iter()
        .map(|m| oracle.utility(Coalition(m)))
        .collect();
    let fact = factorials(n);
    let coeff: Vec<f64> = (0..n)
        .map(|s| fact[s] * fact[n - s - 1] / fact[n])
        .collect();
    let phi = (0..n)
        .map(|i| {
            (0..subsets)
                .map(Coalition)
                .filter(|s| !s.contains(i))
                .map(|s| {
                    coeff[s.len()] * (utilities[s.with(i).0 as usize] - utilities[s.0 as usize])
                })
                .sum()
        })
        .collect();
    Ok(phi)
}

/// Size-weighted FedAvg of the updates of the clients in `subset`.
pub fn subset_model(
    updates: &[ModelParams],
    sizes: &[u64],
    subset: Coalition,
) -> Result<ModelParams> {
    if updates.len() != sizes.len() {
        return Err(ContributionError::InvalidArgument(format!(
            "{} updates but {} sizes",
            updates.len(),
            sizes.len()
        )));
    }
    if subset.is_empty() {
        return Err(ContributionError::InvalidArgument(
            "empty coalition has no model".into(),
        ));
    }
    if subset.members().any(|i| i >= updates.len()) {
        return Err(ContributionError::InvalidArgument(format!(
            "coalition {:#b} names clients outside 0..{}",
            subset.0,
            updates.len()
        )));
    }
    let members: Vec<usize> = subset.members().collect();
    let picked: Vec<ModelParams> = members.iter().map(|&i| updates[i].clone()).collect();
    let weights: Vec<f64> = members.iter().map(|&i| sizes[i] as f64).collect();
    Ok(fl::server_update(&picked, &weights)?)
}
