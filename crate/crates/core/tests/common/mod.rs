//! Reference implementations used only by tests. None of them share code with
//! the library: losses are written out by hand and Shapley values come from
//! averaging over every arrival order.

#![allow(dead_code)]

use std::path::PathBuf;

use fedtoken::sim::SimConfig;
use itertools::Itertools;
use rand::Rng;

pub fn default_config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

pub fn default_config() -> SimConfig {
    SimConfig::load(&default_config_path()).expect("shipped config parses")
}

/// Shapley values as the mean marginal contribution over all `n!` orders.
pub fn permutation_shapley(n: usize, utility: impl Fn(u32) -> f64) -> Vec<f64> {
    let mut phi = vec![0.0; n];
    let mut orders = 0usize;
    for order in (0..n).permutations(n) {
        let mut coalition = 0u32;
        for &i in &order {
            let before = utility(coalition);
            coalition |= 1 << i;
            phi[i] += utility(coalition) - before;
        }
        orders += 1;
    }
    phi.iter().map(|p| p / orders as f64).collect()
}

/// Random characteristic function over `n` players as a lookup table.
pub fn random_game(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect()
}

/// Cross-entropy of one sample under a `classes x (features + 1)` row-major
/// weight matrix whose last column is the bias.
pub fn reference_loss(
    weights: &[f64],
    features: usize,
    classes: usize,
    x: &[f64],
    y: usize,
) -> f64 {
    let z: Vec<f64> = (0..classes)
        .map(|c| {
            let base = c * (features + 1);
            let mut acc = weights[base + features];
            for j in 0..features {
                acc += weights[base + j] * x[j];
            }
            acc
        })
        .collect();
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    log_norm - z[y]
}

/// Central differences of `f` at `w` with step `h`.
pub fn finite_difference(w: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = w.to_vec();
    (0..w.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = f(&probe);
            probe[k] = orig - h;
            let down = f(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn population_std(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}
