//! Categorical distribution over the unmasked actions.

use rand::Rng;

use crate::error::{Error, Result};

/// Log-probabilities with masked entries set to `-inf`.
pub fn masked_log_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    assert_eq!(logits.len(), mask.len());
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllMasked);
    }
    let sum: f64 = logits.iter().zip(mask).filter(|(_, &m)| m).map(|(&l, _)| (l - max).exp()).sum();
    let log_z = max + sum.ln();
    Ok(logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { l - log_z } else { f64::NEG_INFINITY })
        .collect())
}

pub fn probs(log_probs: &[f64]) -> Vec<f64> {
    log_probs.iter().map(|lp| lp.exp()).collect()
}

pub fn entropy(log_probs: &[f64]) -> f64 {
    -log_probs.iter().filter(|lp| lp.is_finite()).map(|&lp| lp.exp() * lp).sum::<f64>()
}

/// Inverse-CDF draw; never returns a masked action.
pub fn sample<R: Rng + ?Sized>(log_probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (a, lp) in log_probs.iter().enumerate() {
        if !lp.is_finite() {
            continue;
        }
        acc += lp.exp();
        last = a;
        if u < acc {
            return a;
        }
    }
    last
}

/// Most likely action, lowest index on ties.
pub fn argmax(log_probs: &[f64]) -> usize {
    let mut best = 0;
    for (a, &lp) in log_probs.iter().enumerate() {
        if lp > log_probs[best] {
            best = a;
        }
    }
    best
}
