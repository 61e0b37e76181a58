//! JSON weight dumps.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use satedge_core::rng::fnv1a64;

use crate::agent::{PpoAgent, PpoConfig};
use crate::error::{Error, Result};
use crate::nn::Mlp;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// Hash of the experiment configuration that produced the weights.
    pub config_hash: String,
    pub ppo: PpoConfig,
    pub policy: Mlp,
    pub value: Mlp,
}

/// Stable 64-bit hex digest of any serializable configuration.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    format!("{:016x}", fnv1a64(&bytes))
}

impl Checkpoint {
    pub fn from_agent(agent: &PpoAgent, config_hash: String) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            config_hash,
            ppo: agent.cfg.clone(),
            policy: agent.policy.clone(),
            value: agent.value.clone(),
        }
    }

    pub fn into_agent(self, seed: u64) -> PpoAgent {
        PpoAgent::from_parts(self.ppo, self.policy, self.value, seed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        if ck.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {}", ck.format_version)));
        }
        if ck.policy.params.len() != crate::nn::param_count(&ck.policy.sizes)
            || ck.value.params.len() != crate::nn::param_count(&ck.value.sizes)
        {
            return Err(Error::Checkpoint("parameter count does not match layer sizes".into()));
        }
        Ok(ck)
    }
}
