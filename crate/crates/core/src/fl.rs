//! Federated averaging with a multinomial logistic-regression model.
//!
//! One round: the server broadcasts the global weights, every client runs
//! mini-batch SGD on its own data, and the server takes the dataset-size
//! weighted mean of the returned weights.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apportion;
use crate::rng::{self, tag};

pub const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("aggregation failed: {0}")]
    Aggregation(String),
}

pub type Result<T> = std::result::Result<T, FlError>;

/// Flat model weights: one row of `features` coefficients plus a bias per
/// class, rows stored back to back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    features: usize,
    classes: usize,
    weights: Vec<f64>,
}

impl ModelParams {
    pub fn from_weights(features: usize, classes: usize, weights: Vec<f64>) -> Result<Self> {
        if features == 0 || classes < 2 {
            return Err(FlError::InvalidArgument(format!(
                "model needs features >= 1 and classes >= 2, got {features} and {classes}"
            )));
        }
        if weights.len() != classes * (features + 1) {
            return Err(FlError::DimensionMismatch {
                expected: format!("{} weights", classes * (features + 1)),
                got: format!("{} weights", weights.len()),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(FlError::InvalidArgument(format!(
                "weight {i} is not finite"
            )));
        }
        Ok(Self {
            features,
            classes,
            weights,
        })
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Total number of parameters.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stride(&self) -> usize {
        self.features + 1
    }

    /// Class scores for one sample.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.stride())
            .map(|row| {
                let (coef, bias) = row.split_at(self.features);
                coef.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias[0]
            })
            .collect()
    }

    /// Argmax class; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.logits(x);
        let mut best = 0;
        for (c, &v) in z.iter().enumerate().skip(1) {
            if v > z[best] {
                best = c;
            }
        }
        best
    }

    fn check_compatible(&self, data: &Dataset) -> Result<()> {
        if self.features != data.n_features || self.classes != data.classes {
            return Err(FlError::DimensionMismatch {
                expected: format!("{} features x {} classes", self.features, self.classes),
                got: format!("{} features x {} classes", data.n_features, data.classes),
            });
        }
        Ok(())
    }
}

/// Labeled samples owned by one client (or the server's test set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_features: usize,
    classes: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    owner: Option<u32>,
}

impl Dataset {
    pub fn new(
        n_features: usize,
        classes: usize,
        features: Vec<f64>,
        labels: Vec<usize>,
        owner: Option<u32>,
    ) -> Result<Self> {
        if n_features == 0 || classes < 2 {
            return Err(FlError::InvalidArgument(format!(
                "dataset needs features >= 1 and classes >= 2, got {n_features} and {classes}"
            )));
        }
        if labels.is_empty() {
            return Err(FlError::InvalidArgument("dataset has no samples".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(FlError::DimensionMismatch {
                expected: format!("{} feature values", labels.len() * n_features),
                got: format!("{} feature values", features.len()),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(FlError::InvalidArgument(format!(
                "label {l} outside 0..{classes}"
            )));
        }
        Ok(Self {
            n_features,
            classes,
            features,
            labels,
            owner,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn owner(&self) -> Option<u32> {
        self.owner
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Per-class sample counts.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same samples with rows reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut features = Vec::with_capacity(self.features.len());
        let mut labels = Vec::with_capacity(self.labels.len());
        for &i in order {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rounds: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.local_epochs == 0 || self.batch_size == 0 || self.rounds == 0 {
            return Err(FlError::InvalidArgument(
                "local_epochs, batch_size and rounds must be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(FlError::InvalidArgument(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// Config whose shuffling stream is specific to `round`.
    pub fn for_round(&self, round: u64) -> Self {
        Self {
            seed: rng::derive(self.seed, &[tag::ROUND, round]),
            ..*self
        }
    }
}

/// Uniform weights in `[-INIT_SCALE, INIT_SCALE]`.
pub fn init_model(features: usize, classes: usize, seed: u64) -> Result<ModelParams> {
    if features == 0 || classes < 2 {
        return Err(FlError::InvalidArgument(format!(
            "init_model needs dim >= 1 and classes >= 2, got {features} and {classes}"
        )));
    }
    let mut rng = rng::stream(seed, &[tag::INIT]);
    let weights = (0..classes * (features + 1))
        .map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE))
        .collect();
    ModelParams::from_weights(features, classes, weights)
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Mean cross-entropy over the given rows.
pub fn loss(model: &ModelParams, data: &Dataset, rows: &[usize]) -> Result<f64> {
    model.check_compatible(data)?;
    let total: f64 = rows
        .iter()
        .map(|&i| {
            let p = softmax(&model.logits(data.row(i)));
            -p[data.labels[i]].ln()
        })
        .sum();
    Ok(total / rows.len() as f64)
}

/// Gradient of [`loss`] with respect to the flat weights.
pub fn gradient(model: &ModelParams, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
    model.check_compatible(data)?;
    let stride = model.stride();
    let mut grad = vec![0.0; model.dim()];
    for &i in rows {
        let x = data.row(i);
        let p = softmax(&model.logits(x));
        for (c, pc) in p.iter().enumerate() {
            let err = pc - if c == data.labels[i] { 1.0 } else { 0.0 };
            let row = &mut grad[c * stride..(c + 1) * stride];
            for (g, v) in row.iter_mut().zip(x) {
                *g += err * v;
            }
            row[model.features] += err;
        }
    }
    let n = rows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(grad)
}

/// Local training: `local_epochs` passes of shuffled mini-batch SGD.
pub fn client_update(
    client: &Dataset,
    model: &ModelParams,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    cfg.validate()?;
    model.check_compatible(client)?;
    let mut current = model.clone();
    let owner = client.owner.map_or(u64::MAX, u64::from);
    let mut rng = rng::stream(cfg.seed, &[tag::SHUFFLE, owner]);
    let mut order: Vec<usize> = (0..client.len()).collect();
    for _ in 0..cfg.local_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let grad = gradient(&current, client, batch)?;
            for (w, g) in current.weights.iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * g;
            }
        }
    }
    if current.weights.iter().any(|w| !w.is_finite()) {
        return Err(FlError::InvalidArgument(
            "training diverged to non-finite weights".into(),
        ));
    }
    Ok(current)
}

/// Weighted mean of model updates (FedAvg).
pub fn server_update(updates: &[ModelParams], aggregation_weights: &[f64]) -> Result<ModelParams> {
    let first = updates
        .first()
        .ok_or_else(|| FlError::Aggregation("no updates to aggregate".into()))?;
    if aggregation_weights.len() != updates.len() {
        return Err(FlError::Aggregation(format!(
            "{} updates but {} aggregation weights",
            updates.len(),
            aggregation_weights.len()
        )));
    }
    if aggregation_weights
        .iter()
        .any(|w| !w.is_finite() || *w < 0.0)
    {
        return Err(FlError::Aggregation(
            "aggregation weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = aggregation_weights.iter().sum();
    if total <= 0.0 {
        return Err(FlError::Aggregation(
            "aggregation weights sum to zero".into(),
        ));
    }
    for u in &updates[1..] {
        if u.features != first.features || u.classes != first.classes {
            return Err(FlError::DimensionMismatch {
                expected: format!("{} parameters", first.dim()),
                got: format!("{} parameters", u.dim()),
            });
        }
    }
    let mut weights = vec![0.0; first.dim()];
    for (u, w) in updates.iter().zip(aggregation_weights) {
        let p = w / total;
        for (acc, v) in weights.iter_mut().zip(&u.weights) {
            *acc += p * v;
        }
    }
    ModelParams::from_weights(first.features, first.classes, weights)
}

/// Fraction of `test` samples classified correctly.
pub fn evaluate(model: &ModelParams, test: &Dataset) -> Result<f64> {
    model.check_compatible(test)?;
    if test.is_empty() {
        return Err(FlError::InvalidArgument("empty test set".into()));
    }
    let correct = (0..test.len())
        .filter(|&i| model.predict(test.row(i)) == test.labels[i])
        .count();
    Ok(correct as f64 / test.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutput {
    pub global: ModelParams,
    pub updates: Vec<ModelParams>,
}

/// One full round: broadcast, local updates, size-weighted aggregation.
pub fn run_round(
    global: &ModelParams,
    clients: &[Dataset],
    cfg: &TrainConfig,
) -> Result<RoundOutput> {
    if clients.is_empty() {
        return Err(FlError::InvalidArgument(
            "round needs at least one client".into(),
        ));
    }
    let updates = clients
        .par_iter()
        .map(|c| client_update(c, global, cfg))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<f64> = clients.iter().map(|c| c.len() as f64).collect();
    let global = server_update(&updates, &sizes)?;
    Ok(RoundOutput { global, updates })
}

/// Parameters of the synthetic Gaussian-cluster federation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub clients: usize,
    pub samples_per_client: usize,
    pub test_samples: usize,
    pub classes: usize,
    pub features: usize,
    pub dirichlet_alpha: f64,
    /// Distance of each class mean from the origin.
    pub class_separation: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Federation {
    pub clients: Vec<Dataset>,
    pub test: Dataset,
}

/// Class `c` is centered on axis `c mod features`, on the positive side for
/// even passes over the axes and the negative side for odd ones.
fn class_mean(c: usize, features: usize, separation: f64) -> Vec<f64> {
    let mut m = vec![0.0; features];
    let pass = c / features;
    let sign = if pass.is_multiple_of(2) { 1.0 } else { -1.0 };
    m[c % features] = sign * separation * (1 + pass / 2) as f64;
    m
}

fn sample_class(rng: &mut impl Rng, mean: &[f64], out: &mut Vec<f64>) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    out.extend(mean.iter().map(|m| m + normal.sample(rng)));
}

/// Dirichlet(alpha) label proportions via normalized Gamma draws.
fn dirichlet(rng: &mut impl Rng, alpha: f64, k: usize) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        draws.into_iter().map(|d| d / sum).collect()
    } else {
        // Every draw underflowed; the limit is all mass on one class.
        let mut one_hot = vec![0.0; k];
        one_hot[rng.random_range(0..k)] = 1.0;
        one_hot
    }
}

/// Non-IID client datasets with Dirichlet label skew, plus a balanced IID
/// test set.
pub fn generate_synthetic_federation(spec: &SyntheticSpec) -> Result<Federation> {
    if spec.clients == 0 || spec.samples_per_client == 0 || spec.test_samples == 0 {
        return Err(FlError::InvalidArgument(
            "clients, samples_per_client and test_samples must be positive".into(),
        ));
    }
    if spec.classes < 2 || spec.features == 0 {
        return Err(FlError::InvalidArgument(format!(
            "need classes >= 2 and features >= 1, got {} and {}",
            spec.classes, spec.features
        )));
    }
    if !(spec.dirichlet_alpha > 0.0 && spec.dirichlet_alpha.is_finite()) {
        return Err(FlError::InvalidArgument(format!(
            "dirichlet_alpha must be positive, got {}",
            spec.dirichlet_alpha
        )));
    }
    if !spec.class_separation.is_finite() {
        return Err(FlError::InvalidArgument(
            "class_separation must be finite".into(),
        ));
    }
    let means: Vec<Vec<f64>> = (0..spec.classes)
        .map(|c| class_mean(c, spec.features, spec.class_separation))
        .collect();

    let mut clients = Vec::with_capacity(spec.clients);
    for k in 0..spec.clients {
        let mut rng = rng::stream(spec.seed, &[tag::DATA, k as u64]);
        let props = dirichlet(&mut rng, spec.dirichlet_alpha, spec.classes);
        let counts = apportion::by_shares(spec.samples_per_client as u64, &props)
            .map_err(|e| FlError::InvalidArgument(e.to_string()))?;
        let mut features = Vec::with_capacity(spec.samples_per_client * spec.features);
        let mut labels = Vec::with_capacity(spec.samples_per_client);
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                sample_class(&mut rng, &means[c], &mut features);
                labels.push(c);
            }
        }
        clients.push(Dataset::new(
            spec.features,
            spec.classes,
            features,
            labels,
            Some(k as u32),
        )?);
    }

    let mut rng = rng::stream(spec.seed, &[tag::DATA, u64::MAX]);
    let mut features = Vec::with_capacity(spec.test_samples * spec.features);
    let mut labels = Vec::with_capacity(spec.test_samples);
    for i in 0..spec.test_samples {
        let c = i % spec.classes;
        sample_class(&mut rng, &means[c], &mut features);
        labels.push(c);
    }
    let test = Dataset::new(spec.features, spec.classes, features, labels, None)?;
    Ok(Federation { clients, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(lr: f64) -> TrainConfig {
        TrainConfig {
            local_epochs: 1,
            batch_size: 1,
            learning_rate: lr,
            rounds: 1,
            seed: 3,
        }
    }

    fn params(w: &[f64]) -> ModelParams {
        ModelParams::from_weights(1, 2, w.to_vec()).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_model(2, 2, 42).unwrap();
        let b = init_model(2, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 6);
        assert!(a
            .weights()
            .iter()
            .all(|w| w.abs() <= 0.1 && w.abs() <= INIT_SCALE));
        assert_ne!(a, init_model(2, 2, 43).unwrap());
    }

    #[test]
    fn init_rejects_bad_dims() {
        assert!(matches!(
            init_model(0, 2, 1),
            Err(FlError::InvalidArgument(_))
        ));
        assert!(matches!(
            init_model(2, 1, 1),
            Err(FlError::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_finite_weights_rejected() {
        assert!(ModelParams::from_weights(1, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(1, 2, vec![], vec![], None).is_err());
        assert!(Dataset::new(2, 2, vec![1.0], vec![0], None).is_err());
        assert!(Dataset::new(1, 2, vec![1.0], vec![2], None).is_err());
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let data = Dataset::new(1, 2, vec![0.5, -1.0], vec![0, 1], Some(0)).unwrap();
        let m = init_model(1, 2, 5).unwrap();
        assert_eq!(client_update(&data, &m, &cfg(0.0)).unwrap(), m);
    }

    #[test]
    fn dimension_mismatch() {
        let data = Dataset::new(2, 2, vec![0.5, -1.0], vec![0], Some(0)).unwrap();
        let m = init_model(1, 2, 5).unwrap();
        assert!(matches!(
            client_update(&data, &m, &cfg(0.1)),
            Err(FlError::DimensionMismatch { .. })
        ));
        assert!(evaluate(&m, &data).is_err());
    }

    #[test]
    fn client_update_does_not_touch_input() {
        let data = Dataset::new(1, 2, vec![0.5, -1.0], vec![0, 1], Some(0)).unwrap();
        let m = init_model(1, 2, 5).unwrap();
        let copy = m.clone();
        let out = client_update(&data, &m, &cfg(0.5)).unwrap();
        assert_eq!(m, copy);
        assert_ne!(out, m);
        assert_eq!(out, client_update(&data, &m, &cfg(0.5)).unwrap());
    }

    #[test]
    fn server_update_examples() {
        let a = params(&[1.0, 1.0, 1.0, 1.0]);
        let b = params(&[3.0, 3.0, 3.0, 3.0]);
        let mean = server_update(&[a.clone(), b.clone()], &[1.0, 1.0]).unwrap();
        assert_eq!(mean.weights(), &[2.0; 4]);
        let weighted = server_update(&[a.clone(), b], &[1.0, 3.0]).unwrap();
        assert_eq!(weighted.weights(), &[2.5; 4]);
        assert_eq!(server_update(std::slice::from_ref(&a), &[7.0]).unwrap(), a);
    }

    #[test]
    fn server_update_errors() {
        assert!(matches!(
            server_update(&[], &[]),
            Err(FlError::Aggregation(_))
        ));
        let a = params(&[1.0; 4]);
        assert!(matches!(
            server_update(std::slice::from_ref(&a), &[0.0]),
            Err(FlError::Aggregation(_))
        ));
        let other = init_model(2, 2, 0).unwrap();
        assert!(server_update(&[a, other], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn evaluate_extremes() {
        // w·x: class 1 wins for x > 0.
        let m = params(&[-1.0, 0.0, 1.0, 0.0]);
        let xs = vec![1.0, 2.0, -1.0, -3.0];
        let right = Dataset::new(1, 2, xs.clone(), vec![1, 1, 0, 0], None).unwrap();
        let wrong = Dataset::new(1, 2, xs, vec![0, 0, 1, 1], None).unwrap();
        assert_eq!(evaluate(&m, &right).unwrap(), 1.0);
        assert_eq!(evaluate(&m, &wrong).unwrap(), 0.0);
    }

    #[test]
    fn argmax_ties_go_to_lowest_class() {
        let m = ModelParams::from_weights(1, 3, vec![0.0; 6]).unwrap();
        assert_eq!(m.predict(&[4.0]), 0);
    }

    #[test]
    fn random_model_is_near_chance() {
        let spec = SyntheticSpec {
            clients: 1,
            samples_per_client: 10,
            test_samples: 1000,
            classes: 2,
            features: 2,
            dirichlet_alpha: 1.0,
            class_separation: 2.0,
            seed: 11,
        };
        let fed = generate_synthetic_federation(&spec).unwrap();
        let seeds = 200;
        let mean: f64 = (0..seeds)
            .map(|s| evaluate(&init_model(2, 2, s).unwrap(), &fed.test).unwrap())
            .sum::<f64>()
            / seeds as f64;
        assert!((mean - 0.5).abs() <= 0.05, "mean accuracy {mean}");
    }

    #[test]
    fn single_client_round_returns_its_update() {
        let data = Dataset::new(1, 2, vec![0.5, -1.0, 2.0], vec![0, 1, 1], Some(0)).unwrap();
        let m = init_model(1, 2, 5).unwrap();
        let c = cfg(0.3);
        let out = run_round(&m, std::slice::from_ref(&data), &c).unwrap();
        assert_eq!(out.global, out.updates[0]);
        assert_eq!(out.global, client_update(&data, &m, &c).unwrap());
    }

    #[test]
    fn identical_clients_round() {
        let d0 = Dataset::new(1, 2, vec![0.5, -1.0, 2.0], vec![0, 1, 1], None).unwrap();
        let m = init_model(1, 2, 5).unwrap();
        let out = run_round(&m, &[d0.clone(), d0], &cfg(0.3)).unwrap();
        assert_eq!(out.updates[0], out.updates[1]);
        assert_eq!(out.global, out.updates[0]);
    }

    #[test]
    fn empty_round_rejected() {
        let m = init_model(1, 2, 5).unwrap();
        assert!(run_round(&m, &[], &cfg(0.1)).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec {
            clients: 3,
            samples_per_client: 50,
            test_samples: 40,
            classes: 3,
            features: 2,
            dirichlet_alpha: 0.5,
            class_separation: 2.0,
            seed: 8,
        };
        assert_eq!(
            generate_synthetic_federation(&spec).unwrap(),
            generate_synthetic_federation(&spec).unwrap()
        );
        let bad = SyntheticSpec { classes: 1, ..spec };
        assert!(generate_synthetic_federation(&bad).is_err());
        let bad = SyntheticSpec { clients: 0, ..spec };
        assert!(generate_synthetic_federation(&bad).is_err());
        let bad = SyntheticSpec {
            dirichlet_alpha: 0.0,
            ..spec
        };
        assert!(generate_synthetic_federation(&bad).is_err());
    }

    #[test]
    fn huge_alpha_is_near_uniform() {
        let spec = SyntheticSpec {
            clients: 5,
            samples_per_client: 400,
            test_samples: 40,
            classes: 4,
            features: 3,
            dirichlet_alpha: 1e6,
            class_separation: 2.0,
            seed: 21,
        };
        let fed = generate_synthetic_federation(&spec).unwrap();
        for c in &fed.clients {
            for n in c.label_counts() {
                let p = n as f64 / c.len() as f64;
                assert!((p - 0.25).abs() <= 0.05, "proportion {p}");
            }
        }
    }

    #[test]
    fn small_alpha_is_skewed() {
        let spec = SyntheticSpec {
            clients: 5,
            samples_per_client: 200,
            test_samples: 40,
            classes: 4,
            features: 3,
            dirichlet_alpha: 0.1,
            class_separation: 2.0,
            seed: 21,
        };
        let fed = generate_synthetic_federation(&spec).unwrap();
        assert!(fed
            .clients
            .iter()
            .any(|c| c.label_counts().iter().any(|&n| n * 2 > c.len())));
    }

    proptest! {
        #[test]
        fn aggregation_scale_invariant(
            a in prop::collection::vec(-5.0f64..5.0, 4),
            b in prop::collection::vec(-5.0f64..5.0, 4),
            wa in 0.1f64..10.0,
            wb in 0.1f64..10.0,
            scale in 0.01f64..100.0,
        ) {
            let (a, b) = (params(&a), params(&b));
            let base = server_update(&[a.clone(), b.clone()], &[wa, wb]).unwrap();
            let scaled = server_update(&[a.clone(), b.clone()], &[wa * scale, wb * scale]).unwrap();
            for (x, y) in base.weights().iter().zip(scaled.weights()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
            let eq = server_update(&[a.clone(), b.clone()], &[1.0, 1.0]).unwrap();
            for ((m, x), y) in eq.weights().iter().zip(a.weights()).zip(b.weights()) {
                prop_assert!((m - (x + y) / 2.0).abs() <= 1e-12 * (1.0 + m.abs()));
            }
        }

        #[test]
        fn accuracy_bounded_and_permutation_invariant(seed in 0u64..1000, rot in 0usize..30) {
            let spec = SyntheticSpec {
                clients: 1, samples_per_client: 5, test_samples: 30, classes: 3,
                features: 2, dirichlet_alpha: 1.0, class_separation: 1.0, seed,
            };
            let test = generate_synthetic_federation(&spec).unwrap().test;
            let m = init_model(2, 3, seed).unwrap();
            let acc = evaluate(&m, &test).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            let mut order: Vec<usize> = (0..test.len()).collect();
            order.rotate_left(rot);
            order.reverse();
            prop_assert_eq!(evaluate(&m, &test.permuted(&order)).unwrap(), acc);
        }
    }
}
