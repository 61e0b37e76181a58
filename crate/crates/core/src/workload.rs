//! Task generation.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::adversary;
use crate::error::{Error, Result};

/// Bits per decimal megabyte.
pub const BITS_PER_MB: f64 = 8e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecurityLevel {
    Low,
    Medium,
    High,
}

impl SecurityLevel {
    pub const ALL: [SecurityLevel; 3] = [SecurityLevel::Low, SecurityLevel::Medium, SecurityLevel::High];

    pub fn one_hot(self) -> [f64; 3] {
        match self {
            SecurityLevel::Low => [1.0, 0.0, 0.0],
            SecurityLevel::Medium => [0.0, 1.0, 0.0],
            SecurityLevel::High => [0.0, 0.0, 1.0],
        }
    }
}

/// Cipher block length used for each security level.
pub fn block_length_for(level: SecurityLevel) -> u32 {
    match level {
        SecurityLevel::Low => 192,
        SecurityLevel::Medium => 224,
        SecurityLevel::High => 256,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub data_bits: u64,
    pub level: SecurityLevel,
    pub block_length: u32,
    /// Probability that one malicious satellite breaks the cipher.
    pub break_prob: f64,
}

impl Task {
    pub fn new(id: usize, data_bits: u64, level: SecurityLevel) -> Self {
        let block_length = block_length_for(level);
        Self {
            id,
            data_bits,
            level,
            block_length,
            break_prob: adversary::break_prob(block_length).expect("lattice block lengths are in range"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub tasks_per_period: usize,
    /// Poisson mean of the task size, bits.
    pub mean_data_bits: f64,
    /// Probabilities of Low, Medium, High.
    pub level_probs: [f64; 3],
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            tasks_per_period: 20,
            mean_data_bits: 20.0 * BITS_PER_MB,
            level_probs: [1.0 / 3.0; 3],
        }
    }
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_data_bits > 0.0 && self.mean_data_bits.is_finite()) {
            return Err(Error::InvalidArgument("mean data size must be positive".into()));
        }
        if self.level_probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument("level probabilities must be nonnegative".into()));
        }
        let total: f64 = self.level_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("level probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

fn sample_level<R: Rng + ?Sized>(probs: &[f64; 3], rng: &mut R) -> SecurityLevel {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (level, p) in SecurityLevel::ALL.iter().zip(probs) {
        acc += p;
        if u < acc {
            return *level;
        }
    }
    // Rounding in the cumulative sum; fall back to the last level with mass.
    SecurityLevel::ALL
        .iter()
        .zip(probs)
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(l, _)| *l)
        .unwrap_or(SecurityLevel::High)
}

/// Draws one period of tasks. Sizes are Poisson(lambda) in bits with zero
/// redrawn; the size is drawn before the level for each task.
pub fn generate_period<R: Rng + ?Sized>(cfg: &WorkloadConfig, rng: &mut R) -> Vec<Task> {
    if cfg.tasks_per_period == 0 {
        return Vec::new();
    }
    let poisson = Poisson::new(cfg.mean_data_bits).expect("validated mean");
    (0..cfg.tasks_per_period)
        .map(|id| {
            let data_bits = loop {
                let d: f64 = poisson.sample(rng);
                if d >= 1.0 {
                    break d as u64;
                }
            };
            let level = sample_level(&cfg.level_probs, rng);
            Task::new(id, data_bits, level)
        })
        .collect()
}
