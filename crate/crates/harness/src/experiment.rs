//! Seeded evaluation runs and sweeps with CSV output.
//!
//! Every policy in a cell sees the same evaluation episode seeds, hence the
//! same workloads and link geometry (common random numbers). `results.csv`
//! and `summary.csv` depend only on the configuration; wall-clock times go
//! to a separate `timing.csv`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use satedge_core::baselines::{make_baseline, Policy};
use satedge_core::env::{EpisodeSummary, OffloadEnv};
use satedge_core::rng::{derive_seed, fnv1a64};
use satedge_ppo::agent::GreedyPolicy;
use satedge_ppo::checkpoint::Checkpoint;
use satedge_ppo::{train, CurvePoint, PpoAgent};

use crate::config::{ExperimentConfig, PolicySpec};
use crate::error::Result;
use crate::stats::{mean, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub config_hash: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    pub policy: String,
    pub seed: u64,
    pub episode: usize,
    pub episode_seed: u64,
    pub workload_hash: String,
    pub periods: usize,
    pub makespan: f64,
    pub energy: f64,
    pub attacks: f64,
    pub cost: f64,
    pub reward: f64,
    pub min_success_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config_hash: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    pub policy: String,
    pub episodes: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_makespan: f64,
    pub mean_energy: f64,
    pub mean_attacks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub sweep_value: Option<f64>,
    pub policy: String,
    pub seed: u64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Evaluate this checkpoint instead of training PPO per cell and seed.
    pub checkpoint: Option<PathBuf>,
    /// Train PPO once per cell with this seed and evaluate that agent on
    /// every evaluation seed, instead of training once per seed.
    pub shared_training_seed: Option<u64>,
    /// Skip writing any files.
    pub dry: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub checkpoint: PathBuf,
    pub curve: Vec<CurvePoint>,
    pub episode_rewards: Vec<f64>,
    /// Mean reward of the last 10% of training episodes.
    pub final_reward: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct EpisodeRewardRow {
    episode: usize,
    reward: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<EpisodeRow>,
    pub summary: Vec<SummaryRow>,
    pub timing: Vec<TimingRow>,
}

/// Seed of the `index`-th evaluation episode for master `seed`.
pub fn eval_episode_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed ^ fnv1a64(b"eval-episodes"), index)
}

/// Mean of the last 10% (at least one) of `episode_rewards`.
pub fn final_reward(episode_rewards: &[f64]) -> f64 {
    let n = episode_rewards.len().div_ceil(10).max(1).min(episode_rewards.len());
    mean(&episode_rewards[episode_rewards.len() - n..])
}

/// Runs one episode, returning its totals and a digest of every task seen.
pub fn evaluate_episode(env: &mut OffloadEnv, policy: &mut dyn Policy, episode_seed: u64) -> Result<(EpisodeSummary, String)> {
    env.reset(episode_seed);
    let mut bytes = Vec::new();
    while !env.is_done() {
        if env.decided_count() == 0 {
            bytes.extend((env.period() as u64).to_le_bytes());
            for t in env.tasks() {
                bytes.extend((t.id as u64).to_le_bytes());
                bytes.extend(t.data_bits.to_le_bytes());
                bytes.extend(t.block_length.to_le_bytes());
            }
        }
        let action = policy.act(env)?;
        env.step(action)?;
    }
    Ok((env.summary().clone(), format!("{:016x}", fnv1a64(&bytes))))
}

/// Trains PPO for one cell and seed.
pub fn train_agent(cell: &ExperimentConfig, seed: u64) -> Result<(PpoAgent, Vec<CurvePoint>, Vec<f64>)> {
    let mut env = OffloadEnv::new(cell.training_scenario(), seed)?;
    let out = train(&mut env, &cell.ppo, seed)?;
    Ok((out.agent, out.curve, out.episode_rewards))
}

fn cell_tag(value: Option<f64>, seed: u64) -> String {
    match value {
        Some(v) => format!("v{v}_seed{seed}"),
        None => format!("seed{seed}"),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn save_training(dir: &Path, tag: &str, hash: &str, agent: &PpoAgent, curve: &[CurvePoint], rewards: &[f64]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(format!("curve_{tag}.csv")), curve)?;
    let rows: Vec<EpisodeRewardRow> = rewards.iter().enumerate().map(|(episode, &reward)| EpisodeRewardRow { episode, reward }).collect();
    write_csv(&dir.join(format!("episodes_{tag}.csv")), &rows)?;
    let path = dir.join(format!("ppo_{tag}.json"));
    Checkpoint::from_agent(agent, hash.to_string()).save(&path)?;
    Ok(path)
}

/// Trains PPO for every cell and seed, saving checkpoints, learning curves
/// and per-episode training rewards under `out_dir/checkpoints`.
pub fn run_training(cfg: &ExperimentConfig) -> Result<Vec<TrainRecord>> {
    cfg.validate()?;
    let dir = cfg.out_dir.join("checkpoints");
    let mut out = Vec::new();
    for (value, cell) in cfg.cells()? {
        for &seed in &cfg.seeds {
            let (agent, curve, episode_rewards) = train_agent(&cell, seed)?;
            let checkpoint = save_training(&dir, &cell_tag(value, seed), &cell.hash(), &agent, &curve, &episode_rewards)?;
            out.push(TrainRecord {
                sweep_value: value,
                seed,
                checkpoint,
                final_reward: final_reward(&episode_rewards),
                curve,
                episode_rewards,
            });
        }
    }
    Ok(out)
}

/// Evaluates every policy of every cell over `episodes` seeded episodes per
/// master seed and writes `results.csv`, `summary.csv` and `timing.csv`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let loaded = match &opts.checkpoint {
        Some(p) => Some(Checkpoint::load(p)?),
        None => None,
    };
    let mut results = None;
    if !opts.dry {
        fs::create_dir_all(&cfg.out_dir)?;
        results = Some(csv::Writer::from_writer(File::create(cfg.out_dir.join("results.csv"))?));
    }

    let axis = cfg.sweep_axis.name().to_string();
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for (value, cell) in cfg.cells()? {
        let hash = cell.hash();
        let mut env = OffloadEnv::new(cell.scenario.clone(), 0)?;
        let cell_start = rows.len();
        let mut shared: Option<PpoAgent> = None;
        for &policy_spec in &cfg.policies {
            for &seed in &cfg.seeds {
                let train_start = Instant::now();
                let agent = match (policy_spec, &loaded) {
                    (PolicySpec::Ppo, Some(ck)) => Some(ck.clone().into_agent(seed)),
                    (PolicySpec::Ppo, None) => match (opts.shared_training_seed, &shared) {
                        (Some(_), Some(a)) => Some(a.clone()),
                        (train_seed, _) => {
                            let train_seed = train_seed.unwrap_or(seed);
                            let (agent, curve, rewards) = train_agent(&cell, train_seed)?;
                            if !opts.dry {
                                let tag = cell_tag(value, train_seed);
                                save_training(&cfg.out_dir.join("checkpoints"), &tag, &hash, &agent, &curve, &rewards)?;
                            }
                            if opts.shared_training_seed.is_some() {
                                shared = Some(agent.clone());
                            }
                            Some(agent)
                        }
                    },
                    _ => None,
                };
                let train_seconds = train_start.elapsed().as_secs_f64();
                let mut policy: Box<dyn Policy + '_> = match (policy_spec, &agent) {
                    (PolicySpec::Baseline(kind), _) => make_baseline(kind, cell.greedy_samples, seed),
                    (PolicySpec::Ppo, Some(a)) => Box::new(GreedyPolicy(a)),
                    (PolicySpec::Ppo, None) => unreachable!("agent prepared above"),
                };
                let eval_start = Instant::now();
                for k in 0..cfg.episodes {
                    let episode_seed = eval_episode_seed(seed, k as u64);
                    let (s, workload_hash) = evaluate_episode(&mut env, policy.as_mut(), episode_seed)?;
                    rows.push(EpisodeRow {
                        config_hash: hash.clone(),
                        sweep_axis: axis.clone(),
                        sweep_value: value,
                        policy: policy_spec.name().to_string(),
                        seed,
                        episode: k,
                        episode_seed,
                        workload_hash,
                        periods: s.periods,
                        makespan: s.makespan,
                        energy: s.energy,
                        attacks: s.attacks,
                        cost: s.cost,
                        reward: s.reward,
                        min_success_prob: s.min_success_prob,
                    });
                }
                timing.push(TimingRow {
                    sweep_value: value,
                    policy: policy_spec.name().to_string(),
                    seed,
                    train_seconds,
                    eval_seconds: eval_start.elapsed().as_secs_f64(),
                });
            }
        }
        if let Some(w) = results.as_mut() {
            for r in &rows[cell_start..] {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }

    let summary = summarize(&rows);
    if !opts.dry {
        write_csv(&cfg.out_dir.join("summary.csv"), &summary)?;
        write_csv(&cfg.out_dir.join("timing.csv"), &timing)?;
    }
    Ok(RunOutput { rows, summary, timing })
}

/// Mean and spread per (sweep value, policy), in first-seen order.
pub fn summarize(rows: &[EpisodeRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(Option<u64>, String)> = Vec::new();
    let mut groups: BTreeMap<(Option<u64>, String), Vec<&EpisodeRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.sweep_value.map(f64::to_bits), r.policy.clone());
        let g = groups.entry(key.clone()).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let col = |f: fn(&EpisodeRow) -> f64| g.iter().map(|r| f(r)).collect::<Vec<_>>();
            let cost = col(|r| r.cost);
            let reward = col(|r| r.reward);
            SummaryRow {
                config_hash: g[0].config_hash.clone(),
                sweep_axis: g[0].sweep_axis.clone(),
                sweep_value: g[0].sweep_value,
                policy: key.1.clone(),
                episodes: g.len(),
                mean_cost: mean(&cost),
                std_cost: std_dev(&cost),
                mean_reward: mean(&reward),
                std_reward: std_dev(&reward),
                mean_makespan: mean(&col(|r| r.makespan)),
                mean_energy: mean(&col(|r| r.energy)),
                mean_attacks: mean(&col(|r| r.attacks)),
            }
        })
        .collect()
}

/// Reads a `results.csv` written by [`run`].
pub fn read_results(path: &Path) -> Result<Vec<EpisodeRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<EpisodeRow>, _>>()?;
    Ok(rows)
}
