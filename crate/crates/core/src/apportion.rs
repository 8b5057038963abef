//! Largest-remainder (Hamilton) apportionment of an integer total.
//!
//! Remainder units go to the largest fractional parts; ties go to the lower
//! index. Callers order their inputs by ascending id to get the id tie-break.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApportionError {
    #[error("apportionment weights are all zero")]
    ZeroWeights,
    #[error("apportionment weight {0} is negative or not finite")]
    InvalidWeight(usize),
}

/// Splits `total` in exact proportion to integer `weights`.
pub fn by_weights(total: u64, weights: &[u64]) -> Result<Vec<u64>, ApportionError> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    if sum == 0 {
        return Err(ApportionError::ZeroWeights);
    }
    let total128 = total as u128;
    let mut out = Vec::with_capacity(weights.len());
    let mut rems = Vec::with_capacity(weights.len());
    let mut assigned: u128 = 0;
    for (i, &w) in weights.iter().enumerate() {
        let num = total128 * w as u128;
        let q = num / sum;
        assigned += q;
        out.push(q as u64);
        rems.push((num % sum, i));
    }
    let leftover = (total128 - assigned) as usize;
    // Remainders are exact integers over a common denominator.
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(leftover) {
        out[i] += 1;
    }
    Ok(out)
}

/// Splits `total` in proportion to real-valued non-negative `shares`.
///
/// The shares are normalized by their sum first, so they need not sum to one.
/// The result always sums to `total` exactly.
pub fn by_shares(total: u64, shares: &[f64]) -> Result<Vec<u64>, ApportionError> {
    for (i, &s) in shares.iter().enumerate() {
        if !s.is_finite() || s < 0.0 {
            return Err(ApportionError::InvalidWeight(i));
        }
    }
    let sum: f64 = shares.iter().sum();
    if sum <= 0.0 {
        return Err(ApportionError::ZeroWeights);
    }
    let t = total as f64;
    let mut out = Vec::with_capacity(shares.len());
    let mut fracs = Vec::with_capacity(shares.len());
    let mut assigned: i128 = 0;
    for (i, &s) in shares.iter().enumerate() {
        let q = (t * (s / sum)).min(t);
        let f = q.floor();
        out.push(f as u64);
        assigned += f as i128;
        fracs.push((q - f, i));
    }
    let mut leftover = total as i128 - assigned;
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    if leftover >= 0 {
        for &(_, i) in fracs.iter().cycle().take(leftover as usize) {
            out[i] += 1;
        }
    } else {
        // Float floors overshot; take units back from the smallest fractions.
        for &(_, i) in fracs.iter().rev() {
            if leftover == 0 {
                break;
            }
            if out[i] > 0 {
                out[i] -= 1;
                leftover += 1;
            }
        }
    }
    Ok(out)
}
