//! Flat, typed experiment configuration.
//!
//! A config file is a flat TOML table; every key is optional and unknown
//! keys are rejected. Values are layered: preset defaults, then the file,
//! then `SATEDGE_<KEY>` environment variables, then command-line overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use satedge_core::baselines::BaselineKind;
use satedge_core::env::RhoMode;
use satedge_core::link::{db_to_linear, DistanceUnit};
use satedge_core::sim::AttackMode;
use satedge_core::Scenario;
use satedge_ppo::checkpoint::config_hash;
use satedge_ppo::{IntervalUnit, PpoConfig};

use crate::error::{Error, Result};

pub const ENV_PREFIX: &str = "SATEDGE_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    None,
    UpdateInterval,
    LearningRate,
    /// Mean task size, bits.
    TaskSize,
    /// Local CPU frequency, Hz.
    FLocal,
    /// Mean number of malicious satellites.
    Mu,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::UpdateInterval => "update_interval",
            SweepAxis::LearningRate => "learning_rate",
            SweepAxis::TaskSize => "task_size",
            SweepAxis::FLocal => "f_local",
            SweepAxis::Mu => "mu",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => SweepAxis::None,
            "update_interval" => SweepAxis::UpdateInterval,
            "learning_rate" | "lr" => SweepAxis::LearningRate,
            "task_size" | "lambda" => SweepAxis::TaskSize,
            "f_local" => SweepAxis::FLocal,
            "mu" => SweepAxis::Mu,
            _ => return Err(Error::invalid("sweep_axis", format!("unknown axis '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicySpec {
    Ppo,
    Baseline(BaselineKind),
}

impl PolicySpec {
    pub fn name(self) -> &'static str {
        match self {
            PolicySpec::Ppo => "ppo",
            PolicySpec::Baseline(k) => k.name(),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("ppo") {
            return Ok(PolicySpec::Ppo);
        }
        s.parse::<BaselineKind>()
            .map(PolicySpec::Baseline)
            .map_err(|_| Error::invalid("policies", format!("unknown policy '{s}'")))
    }
}

impl Serialize for PolicySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Every accepted key. Units follow the key suffix.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatConfig {
    preset: Option<String>,

    satellite_count: Option<usize>,
    earth_radius_km: Option<f64>,
    orbit_altitude_km: Option<f64>,
    angular_spacing_deg: Option<f64>,
    angular_velocity_deg_s: Option<f64>,
    visibility_bound_deg: Option<f64>,
    initial_offset_deg: Option<f64>,

    beta0_db: Option<f64>,
    tx_power_w: Option<f64>,
    noise_power_w: Option<f64>,
    bandwidth_hz: Option<f64>,
    distance_unit: Option<DistanceUnit>,

    tasks_per_period: Option<usize>,
    mean_data_bits: Option<f64>,
    level_probs: Option<[f64; 3]>,

    mean_malicious: Option<f64>,
    forced_malicious: Option<u32>,

    q_local: Option<f64>,
    f_local_hz: Option<f64>,
    q_en: Option<f64>,
    f_en_hz: Option<f64>,
    k_hw: Option<f64>,
    q_sat: Option<f64>,
    f_sat_hz: Option<f64>,

    beta1: Option<f64>,
    beta2: Option<f64>,

    periods: Option<usize>,
    period_length_s: Option<f64>,
    obs_backlog_scale_s: Option<f64>,
    rho: Option<f64>,
    rho_margin: Option<f64>,
    rho_mode: Option<RhoMode>,
    rho_penalty: Option<f64>,
    attack_mode: Option<AttackMode>,

    total_timesteps: Option<u64>,
    update_interval: Option<usize>,
    interval_unit: Option<IntervalUnit>,
    batch_size: Option<usize>,
    gamma: Option<f64>,
    gae_lambda: Option<f64>,
    clip_range: Option<f64>,
    value_coef: Option<f64>,
    entropy_coef: Option<f64>,
    learning_rate: Option<f64>,
    epochs_per_update: Option<usize>,
    hidden: Option<Vec<usize>>,
    max_grad_norm: Option<f64>,
    normalize_advantages: Option<bool>,
    reward_scale: Option<f64>,
    lr_anneal: Option<bool>,

    policies: Option<Vec<String>>,
    greedy_samples: Option<usize>,
    sweep_axis: Option<String>,
    sweep_values: Option<Vec<f64>>,
    episodes: Option<usize>,
    seeds: Option<Vec<u64>>,
    out_dir: Option<String>,
    train_attack_mode: Option<AttackMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub ppo: PpoConfig,
    pub policies: Vec<PolicySpec>,
    /// Random candidates per period for the greedy baseline.
    pub greedy_samples: usize,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// Evaluation episodes per (cell, seed).
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Attack model used while training PPO; evaluation always uses the
    /// scenario's. `expected` replaces the 0/1 attack draw by its mean.
    pub train_attack_mode: Option<AttackMode>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_scenario(Scenario::reference())
    }
}

impl ExperimentConfig {
    pub fn from_scenario(scenario: Scenario) -> Self {
        Self {
            scenario,
            ppo: PpoConfig::default(),
            policies: vec![
                PolicySpec::Baseline(BaselineKind::Greedy),
                PolicySpec::Baseline(BaselineKind::RoundRobin),
                PolicySpec::Baseline(BaselineKind::AllLocal),
                PolicySpec::Baseline(BaselineKind::AllOffloading),
            ],
            greedy_samples: 1000,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
            episodes: 10,
            seeds: vec![0],
            out_dir: PathBuf::from("results"),
            train_attack_mode: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.ppo.validate()?;
        if self.policies.is_empty() {
            return Err(Error::invalid("policies", "at least one policy is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required"));
        }
        if self.episodes == 0 {
            return Err(Error::invalid("episodes", "must be >= 1"));
        }
        if self.greedy_samples == 0 {
            return Err(Error::invalid("greedy_samples", "must be >= 1"));
        }
        if self.sweep_axis != SweepAxis::None {
            if self.sweep_values.is_empty() {
                return Err(Error::invalid("sweep_values", "must be non-empty when sweep_axis is set"));
            }
            for &v in &self.sweep_values {
                self.with_value(v)?;
            }
        }
        Ok(())
    }

    /// Copy with the sweep axis set to `value`.
    pub fn with_value(&self, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let key = "sweep_values";
        match self.sweep_axis {
            SweepAxis::None => {}
            SweepAxis::UpdateInterval => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid(key, format!("update_interval {value} is not a positive integer")));
                }
                c.ppo.update_interval = value as usize;
            }
            SweepAxis::LearningRate => c.ppo.learning_rate = value,
            SweepAxis::TaskSize => c.scenario.workload.mean_data_bits = value,
            SweepAxis::FLocal => c.scenario.compute.f_local_hz = value,
            SweepAxis::Mu => c.scenario.adversary.mean_malicious = value,
        }
        c.scenario.validate().map_err(|e| Error::invalid(key, e.to_string()))?;
        c.ppo.validate().map_err(|e| Error::invalid(key, e.to_string()))?;
        Ok(c)
    }

    /// `(sweep value, cell config)` pairs; a single `None` cell without a sweep.
    pub fn cells(&self) -> Result<Vec<(Option<f64>, ExperimentConfig)>> {
        if self.sweep_axis == SweepAxis::None {
            return Ok(vec![(None, self.clone())]);
        }
        self.sweep_values.iter().map(|&v| Ok((Some(v), self.with_value(v)?))).collect()
    }

    /// Scenario PPO is trained on.
    pub fn training_scenario(&self) -> Scenario {
        let mut s = self.scenario.clone();
        if let Some(m) = self.train_attack_mode {
            s.env.attack_mode = m;
        }
        s
    }

    /// Digest of everything that determines a cell's results.
    pub fn hash(&self) -> String {
        config_hash(&(&self.scenario, &self.ppo, self.greedy_samples, self.train_attack_mode))
    }
}

/// PPO settings tuned for the desk presets: 5e4 micro-steps, updates every
/// 20 episodes, rewards scaled by 0.05 (period costs are ~15), a faster
/// learning rate annealed linearly to zero and no entropy bonus.
pub fn desk_ppo() -> PpoConfig {
    PpoConfig {
        total_timesteps: 50_000,
        update_interval: 20,
        learning_rate: 1e-3,
        entropy_coef: 0.0,
        reward_scale: 0.05,
        lr_anneal: true,
        ..PpoConfig::default()
    }
}

/// Parses a raw override string as a TOML value, falling back to a string.
pub fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// `SATEDGE_<KEY>` variables as lower-case key overrides.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<(String, Value)> {
    let mut out: Vec<(String, Value)> = vars
        .into_iter()
        .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|key| (key.to_ascii_lowercase(), parse_value(&v))))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Loads `path` (or nothing), applies `overrides` in order, validates.
pub fn load_config(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<ExperimentConfig> {
    let mut table = match path {
        Some(p) => {
            if !p.exists() {
                return Err(Error::ConfigNotFound(p.to_path_buf()));
            }
            let text = fs::read_to_string(p)?;
            text.parse::<Table>()
                .map_err(|e| Error::Parse { source_name: p.display().to_string(), message: e.to_string() })?
        }
        None => Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    let flat: FlatConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse { source_name: "config".into(), message: e.to_string() })?;
    let cfg = resolve(flat)?;
    cfg.validate()?;
    Ok(cfg)
}

fn resolve(f: FlatConfig) -> Result<ExperimentConfig> {
    let scenario = match f.preset.as_deref().unwrap_or("reference") {
        "reference" => Scenario::reference(),
        "desk" => Scenario::desk(),
        "constraint_stress" => Scenario::constraint_stress(),
        other => return Err(Error::invalid("preset", format!("unknown preset '{other}'"))),
    };
    let desk = matches!(f.preset.as_deref(), Some("desk" | "constraint_stress"));
    let mut c = ExperimentConfig::from_scenario(scenario);
    if desk {
        c.ppo = desk_ppo();
        c.train_attack_mode = Some(AttackMode::Expected);
    }
    let s = &mut c.scenario;

    macro_rules! set {
        ($src:expr => $dst:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }

    set!(f.satellite_count => s.constellation.satellite_count);
    set!(f.earth_radius_km => s.constellation.earth_radius_km);
    set!(f.orbit_altitude_km => s.constellation.orbit_altitude_km);
    set!(f.angular_spacing_deg => s.constellation.angular_spacing_deg);
    set!(f.angular_velocity_deg_s => s.constellation.angular_velocity_deg_s);
    set!(f.visibility_bound_deg => s.constellation.visibility_bound_deg);
    set!(f.initial_offset_deg => s.constellation.initial_offset_deg);

    set!(f.beta0_db.map(db_to_linear) => s.link.beta0);
    set!(f.tx_power_w => s.link.tx_power_w);
    set!(f.noise_power_w => s.link.noise_power_w);
    set!(f.bandwidth_hz => s.link.bandwidth_hz);
    set!(f.distance_unit => s.link.distance_unit);

    set!(f.tasks_per_period => s.workload.tasks_per_period);
    set!(f.mean_data_bits => s.workload.mean_data_bits);
    set!(f.level_probs => s.workload.level_probs);

    set!(f.mean_malicious => s.adversary.mean_malicious);
    if f.forced_malicious.is_some() {
        s.adversary.forced_count = f.forced_malicious;
    }

    set!(f.q_local => s.compute.q_local);
    set!(f.f_local_hz => s.compute.f_local_hz);
    set!(f.q_en => s.compute.q_en);
    set!(f.f_en_hz => s.compute.f_en_hz);
    set!(f.k_hw => s.compute.k_hw);
    let j = s.constellation.satellite_count;
    s.compute.resize(j);
    if let Some(q) = f.q_sat {
        s.compute.q_sat = vec![q; j];
    }
    if let Some(fs) = f.f_sat_hz {
        s.compute.f_sat_hz = vec![fs; j];
    }

    set!(f.beta1 => s.weights.beta1);
    set!(f.beta2 => s.weights.beta2);

    set!(f.periods => s.env.periods);
    set!(f.period_length_s => s.env.period_length_s);
    set!(f.obs_backlog_scale_s => s.env.obs_backlog_scale_s);
    set!(f.rho => s.env.rho);
    set!(f.rho_margin => s.env.rho_margin);
    set!(f.rho_mode => s.env.rho_mode);
    set!(f.rho_penalty => s.env.rho_penalty);
    set!(f.attack_mode => s.env.attack_mode);

    let p = &mut c.ppo;
    set!(f.total_timesteps => p.total_timesteps);
    set!(f.update_interval => p.update_interval);
    set!(f.interval_unit => p.interval_unit);
    set!(f.batch_size => p.batch_size);
    set!(f.gamma => p.gamma);
    set!(f.gae_lambda => p.gae_lambda);
    set!(f.clip_range => p.clip_range);
    set!(f.value_coef => p.value_coef);
    set!(f.entropy_coef => p.entropy_coef);
    set!(f.learning_rate => p.learning_rate);
    set!(f.epochs_per_update => p.epochs_per_update);
    set!(f.hidden => p.hidden);
    set!(f.max_grad_norm => p.max_grad_norm);
    set!(f.normalize_advantages => p.normalize_advantages);
    set!(f.reward_scale => p.reward_scale);
    set!(f.lr_anneal => p.lr_anneal);

    if let Some(names) = f.policies {
        c.policies = names.iter().map(|n| n.parse()).collect::<Result<_>>()?;
    }
    set!(f.greedy_samples => c.greedy_samples);
    if let Some(axis) = f.sweep_axis {
        c.sweep_axis = axis.parse()?;
    }
    set!(f.sweep_values => c.sweep_values);
    set!(f.episodes => c.episodes);
    set!(f.seeds => c.seeds);
    set!(f.out_dir.map(PathBuf::from) => c.out_dir);
    if f.train_attack_mode.is_some() {
        c.train_attack_mode = f.train_attack_mode;
    }
    Ok(c)
}
