//! Malicious-satellite model.
//!
//! An attacker of strength `sigma` breaks every block cipher whose block
//! length is at most `sigma`; the break probability is linear in the block
//! length between `N_MIN` and `N_MAX`. During an offload the number of
//! malicious satellites in range is Poisson(mu), drawn afresh per task.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::Task;

pub const N_MIN: u32 = 128;
pub const N_MAX: u32 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    /// Expected number of malicious satellites in communication range.
    pub mean_malicious: f64,
    /// Test hook: use this many malicious satellites instead of sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_count: Option<u32>,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        Self { mean_malicious: 3.0, forced_count: None }
    }
}

impl AdversaryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_malicious >= 0.0 && self.mean_malicious.is_finite()) {
            return Err(Error::InvalidArgument("mean_malicious must be >= 0".into()));
        }
        Ok(())
    }
}

/// `(N_max - N) / (N_max - N_min)`.
pub fn break_prob(block_length: u32) -> Result<f64> {
    if !(N_MIN..=N_MAX).contains(&block_length) {
        return Err(Error::InvalidArgument(format!(
            "block length {block_length} outside [{N_MIN}, {N_MAX}]"
        )));
    }
    Ok(f64::from(N_MAX - block_length) / f64::from(N_MAX - N_MIN))
}

/// Probability that all `x` attackers fail: `(1 - phi)^x`.
pub fn security_strength(phi: f64, malicious: u32) -> f64 {
    (1.0 - phi).powi(malicious as i32)
}

/// `E[(1 - phi)^x]` for `x ~ Poisson(mu)`, i.e. `exp(-mu * phi)`.
pub fn expected_security_strength(phi: f64, mean_malicious: f64) -> f64 {
    (-mean_malicious * phi).exp()
}

/// Expected number of successful attacks on one offloaded task.
pub fn expected_attack(task: &Task, cfg: &AdversaryConfig) -> f64 {
    match cfg.forced_count {
        Some(x) => 1.0 - security_strength(task.break_prob, x),
        None => 1.0 - expected_security_strength(task.break_prob, cfg.mean_malicious),
    }
}

fn malicious_count<R: Rng + ?Sized>(cfg: &AdversaryConfig, rng: &mut R) -> u32 {
    if let Some(x) = cfg.forced_count {
        return x;
    }
    if cfg.mean_malicious == 0.0 {
        return 0;
    }
    let poisson = Poisson::new(cfg.mean_malicious).expect("validated mean");
    let x: f64 = poisson.sample(rng);
    x as u32
}

/// One Monte Carlo draw for an offloaded task: returns `true` when the task
/// is broken, i.e. `xi > S` with `xi` uniform on [0, 1).
pub fn sample_attack<R: Rng + ?Sized>(task: &Task, rng: &mut R, cfg: &AdversaryConfig) -> bool {
    let x = malicious_count(cfg, rng);
    let strength = security_strength(task.break_prob, x);
    let xi: f64 = rng.random();
    xi > strength
}
