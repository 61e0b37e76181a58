//! Rollout collection and clipped-surrogate updates.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use satedge_core::baselines::Policy;
use satedge_core::env::OffloadEnv;
use satedge_core::rng::{self, SimRng};

use crate::adam::Adam;
use crate::dist;
use crate::error::{Error, Result};
use crate::loss;
use crate::nn::Mlp;

/// The slice of an environment PPO needs.
pub trait Environment {
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn observation_len(&self) -> usize;
    fn action_count(&self) -> usize;
    fn action_mask(&self) -> Vec<bool>;
    /// `(next observation, reward, episode finished)`.
    fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)>;
}

impl Environment for OffloadEnv {
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        OffloadEnv::reset(self, seed)
    }

    fn observation_len(&self) -> usize {
        OffloadEnv::observation_len(self)
    }

    fn action_count(&self) -> usize {
        OffloadEnv::action_count(self)
    }

    fn action_mask(&self) -> Vec<bool> {
        OffloadEnv::action_mask(self)
    }

    fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)> {
        let r = OffloadEnv::step(self, action)?;
        Ok((r.observation, r.reward, r.episode_done))
    }
}

/// What `update_interval` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalUnit {
    #[default]
    Episodes,
    Steps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    /// Environment micro-steps to train for.
    pub total_timesteps: u64,
    pub update_interval: usize,
    pub interval_unit: IntervalUnit,
    pub batch_size: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_range: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    pub epochs_per_update: usize,
    pub hidden: Vec<usize>,
    /// Global gradient-norm clip; 0 disables.
    pub max_grad_norm: f64,
    pub normalize_advantages: bool,
    /// Rewards are multiplied by this before entering the buffer.
    pub reward_scale: f64,
    /// Decay the learning rate linearly to zero over `total_timesteps`.
    #[serde(default)]
    pub lr_anneal: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            total_timesteps: 500_000,
            update_interval: 5,
            interval_unit: IntervalUnit::Episodes,
            batch_size: 64,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_range: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            learning_rate: 3e-4,
            epochs_per_update: 10,
            hidden: vec![64, 64],
            max_grad_norm: 0.5,
            normalize_advantages: true,
            reward_scale: 1.0,
            lr_anneal: false,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma out of [0,1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda out of [0,1]");
        }
        if !(self.clip_range > 0.0) {
            return bad("clip_range must be positive");
        }
        if self.update_interval == 0 || self.batch_size == 0 || self.epochs_per_update == 0 {
            return bad("update_interval, batch_size and epochs_per_update must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden sizes must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0 && self.max_grad_norm >= 0.0) {
            return bad("coefficients must be >= 0");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be positive");
        }
        Ok(())
    }

    fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut s = vec![input];
        s.extend(&self.hidden);
        s.push(output);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub mask: Vec<bool>,
    pub action: usize,
    /// Log-probability of `action` under the behaviour policy.
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// One minibatch row with its advantage and return target.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub obs: &'a [f64],
    pub mask: &'a [bool],
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    /// Mean clipped surrogate.
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    /// `policy - c1 * value + c2 * entropy`.
    pub total: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    pub approx_kl: f64,
}

/// Evaluates the PPO objective on `batch` and, when `grads` is given, adds
/// its gradient (ascent direction) w.r.t. the policy and value parameters.
pub fn objective(
    policy: &Mlp,
    value: &Mlp,
    batch: &[Sample<'_>],
    cfg: &PpoConfig,
    mut grads: Option<(&mut [f64], &mut [f64])>,
) -> Result<LossStats> {
    let n = batch.len() as f64;
    let mut s = LossStats::default();
    for sample in batch {
        let cache = policy.forward_cached(sample.obs);
        let lp = dist::masked_log_softmax(cache.output(), sample.mask)?;
        let h = dist::entropy(&lp);
        let log_ratio = lp[sample.action] - sample.old_log_prob;
        let ratio = log_ratio.exp();
        let adv = sample.advantage;
        let clipped = ratio.clamp(1.0 - cfg.clip_range, 1.0 + cfg.clip_range);
        let unclipped_active = ratio * adv <= clipped * adv;
        s.policy += loss::clipped_surrogate(ratio, adv, cfg.clip_range) / n;
        s.entropy += h / n;
        s.mean_ratio += ratio / n;
        s.approx_kl += ((ratio - 1.0) - log_ratio) / n;
        if (ratio - 1.0).abs() > cfg.clip_range {
            s.clip_fraction += 1.0 / n;
        }

        let vcache = value.forward_cached(sample.obs);
        let v = vcache.output()[0];
        s.value += (v - sample.ret) * (v - sample.ret) / n;

        if let Some((gp, gv)) = grads.as_mut() {
            let g_lp = if unclipped_active { ratio * adv } else { 0.0 };
            let d_logits: Vec<f64> = lp
                .iter()
                .enumerate()
                .map(|(k, &lpk)| {
                    if !lpk.is_finite() {
                        return 0.0;
                    }
                    let p = lpk.exp();
                    let onehot = if k == sample.action { 1.0 } else { 0.0 };
                    (g_lp * (onehot - p) - cfg.entropy_coef * p * (lpk + h)) / n
                })
                .collect();
            policy.backward(&cache, &d_logits, gp);
            let d_v = -cfg.value_coef * 2.0 * (v - sample.ret) / n;
            value.backward(&vcache, &[d_v], gv);
        }
    }
    s.total = loss::total_loss(s.policy, s.value, s.entropy, cfg.value_coef, cfg.entropy_coef);
    Ok(s)
}

/// Averages over the minibatches of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub loss: LossStats,
    pub grad_norm: f64,
    pub minibatches: usize,
}

#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub cfg: PpoConfig,
    pub policy: Mlp,
    /// Behaviour policy; equals `policy` outside of `update`.
    pub policy_old: Mlp,
    pub value: Mlp,
    opt_policy: Adam,
    opt_value: Adam,
    rng: SimRng,
    updates: usize,
}

impl PpoAgent {
    pub fn new(obs_len: usize, actions: usize, cfg: PpoConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut init = rng::substream(seed, rng::INIT);
        let policy = Mlp::new(&cfg.sizes(obs_len, actions), 0.01, &mut init);
        let value = Mlp::new(&cfg.sizes(obs_len, 1), 1.0, &mut init);
        Ok(Self::from_parts(cfg, policy, value, seed))
    }

    pub fn from_parts(cfg: PpoConfig, policy: Mlp, value: Mlp, seed: u64) -> Self {
        Self {
            opt_policy: Adam::new(policy.params.len(), cfg.learning_rate),
            opt_value: Adam::new(value.params.len(), cfg.learning_rate),
            policy_old: policy.clone(),
            policy,
            value,
            rng: rng::substream(seed, rng::POLICY),
            updates: 0,
            cfg,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.opt_policy.lr
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.opt_policy.lr = lr;
        self.opt_value.lr = lr;
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Samples from the behaviour policy: `(action, log_prob, value)`.
    pub fn act(&mut self, obs: &[f64], mask: &[bool]) -> Result<(usize, f64, f64)> {
        let lp = dist::masked_log_softmax(&self.policy_old.forward(obs), mask)?;
        let a = dist::sample(&lp, &mut self.rng);
        Ok((a, lp[a], self.value_of(obs)))
    }

    /// Most likely action under the current policy.
    pub fn act_greedy(&self, obs: &[f64], mask: &[bool]) -> Result<usize> {
        Ok(dist::argmax(&dist::masked_log_softmax(&self.policy.forward(obs), mask)?))
    }

    pub fn value_of(&self, obs: &[f64]) -> f64 {
        self.value.forward(obs)[0]
    }

    /// `epochs_per_update` passes of shuffled minibatch Adam steps on the
    /// buffer, then `theta_old <- theta`.
    pub fn update(&mut self, buffer: &[Transition], last_value: f64) -> Result<UpdateStats> {
        let rewards: Vec<f64> = buffer.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = buffer.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = buffer.iter().map(|t| t.done).collect();
        let (mut adv, ret) = loss::gae(&rewards, &values, &dones, last_value, self.cfg.gamma, self.cfg.gae_lambda);
        if self.cfg.normalize_advantages {
            loss::normalize(&mut adv);
        }

        let mut stats = UpdateStats::default();
        let mut index: Vec<usize> = (0..buffer.len()).collect();
        let mut gp = vec![0.0; self.policy.params.len()];
        let mut gv = vec![0.0; self.value.params.len()];
        for _ in 0..self.cfg.epochs_per_update {
            index.shuffle(&mut self.rng);
            for chunk in index.chunks(self.cfg.batch_size) {
                let batch: Vec<Sample<'_>> = chunk
                    .iter()
                    .map(|&i| Sample {
                        obs: &buffer[i].obs,
                        mask: &buffer[i].mask,
                        action: buffer[i].action,
                        old_log_prob: buffer[i].log_prob,
                        advantage: adv[i],
                        ret: ret[i],
                    })
                    .collect();
                gp.iter_mut().for_each(|g| *g = 0.0);
                gv.iter_mut().for_each(|g| *g = 0.0);
                let l = objective(&self.policy, &self.value, &batch, &self.cfg, Some((&mut gp, &mut gv)))?;
                let norm = gp.iter().chain(&gv).map(|g| g * g).sum::<f64>().sqrt();
                if !norm.is_finite() {
                    return Err(Error::NonFiniteGradient { update: self.updates });
                }
                // Ascent on L is descent on -L.
                let scale = if self.cfg.max_grad_norm > 0.0 && norm > self.cfg.max_grad_norm {
                    -self.cfg.max_grad_norm / norm
                } else {
                    -1.0
                };
                gp.iter_mut().chain(gv.iter_mut()).for_each(|g| *g *= scale);
                self.opt_policy.step(&mut self.policy.params, &gp);
                self.opt_value.step(&mut self.value.params, &gv);

                stats.minibatches += 1;
                stats.grad_norm += norm;
                accumulate(&mut stats.loss, &l);
            }
        }
        let k = stats.minibatches.max(1) as f64;
        stats.grad_norm /= k;
        scale_stats(&mut stats.loss, 1.0 / k);
        self.policy_old = self.policy.clone();
        self.updates += 1;
        Ok(stats)
    }
}

fn accumulate(acc: &mut LossStats, l: &LossStats) {
    acc.policy += l.policy;
    acc.value += l.value;
    acc.entropy += l.entropy;
    acc.total += l.total;
    acc.clip_fraction += l.clip_fraction;
    acc.mean_ratio += l.mean_ratio;
    acc.approx_kl += l.approx_kl;
}

fn scale_stats(s: &mut LossStats, k: f64) {
    s.policy *= k;
    s.value *= k;
    s.entropy *= k;
    s.total *= k;
    s.clip_fraction *= k;
    s.mean_ratio *= k;
    s.approx_kl *= k;
}

/// Deterministic (argmax) evaluation policy.
pub struct GreedyPolicy<'a>(pub &'a PpoAgent);

impl Policy for GreedyPolicy<'_> {
    fn act(&mut self, env: &OffloadEnv) -> satedge_core::Result<usize> {
        self.0
            .act_greedy(&env.observation(), &env.action_mask())
            .map_err(|e| satedge_core::Error::ContractViolation(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub update_index: usize,
    pub env_steps: u64,
    /// Mean undiscounted reward of episodes finished since the previous
    /// update (carried forward when none finished).
    pub mean_episode_reward: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub agent: PpoAgent,
    pub curve: Vec<CurvePoint>,
    /// Undiscounted, unscaled reward of every finished training episode.
    pub episode_rewards: Vec<f64>,
}

/// Seed of the `index`-th training episode for master `seed`.
pub fn training_episode_seed(seed: u64, index: u64) -> u64 {
    rng::derive_seed(seed ^ rng::fnv1a64(b"train-episodes"), index)
}

/// Runs training: collect `update_interval` episodes (or
/// steps) with the behaviour policy, update once the buffer holds at least
/// `batch_size` transitions, clear the buffer, repeat.
pub fn train<E: Environment>(env: &mut E, cfg: &PpoConfig, seed: u64) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut agent = PpoAgent::new(env.observation_len(), env.action_count(), cfg.clone(), seed)?;
    let mut curve = Vec::new();
    let mut episode_rewards = Vec::new();
    if cfg.total_timesteps == 0 {
        return Ok(TrainOutput { agent, curve, episode_rewards });
    }

    let mut steps = 0u64;
    let mut episode = 0u64;
    let mut obs = env.reset(training_episode_seed(seed, 0));
    let mut ep_reward = 0.0;
    let mut buffer: Vec<Transition> = Vec::new();
    let mut rollout_episodes: Vec<f64> = Vec::new();
    let mut rollout_steps = 0usize;
    let mut last_mean = f64::NAN;

    while steps < cfg.total_timesteps {
        let mask = env.action_mask();
        let (action, log_prob, value) = agent.act(&obs, &mask)?;
        let (next, reward, done) = env.step(action)?;
        buffer.push(Transition {
            obs: std::mem::replace(&mut obs, next),
            mask,
            action,
            log_prob,
            value,
            reward: reward * cfg.reward_scale,
            done,
        });
        steps += 1;
        rollout_steps += 1;
        ep_reward += reward;
        if done {
            episode_rewards.push(ep_reward);
            rollout_episodes.push(ep_reward);
            ep_reward = 0.0;
            episode += 1;
            obs = env.reset(training_episode_seed(seed, episode));
        }

        let interval_reached = match cfg.interval_unit {
            IntervalUnit::Episodes => rollout_episodes.len() >= cfg.update_interval,
            IntervalUnit::Steps => rollout_steps >= cfg.update_interval,
        };
        if interval_reached && buffer.len() >= cfg.batch_size {
            let last_value = if done { 0.0 } else { agent.value_of(&obs) };
            if cfg.lr_anneal {
                let left = 1.0 - steps as f64 / cfg.total_timesteps as f64;
                agent.set_learning_rate(cfg.learning_rate * left.max(0.0));
            }
            let stats = agent.update(&buffer, last_value)?;
            if !rollout_episodes.is_empty() {
                last_mean = rollout_episodes.iter().sum::<f64>() / rollout_episodes.len() as f64;
            }
            curve.push(CurvePoint {
                update_index: curve.len(),
                env_steps: steps,
                mean_episode_reward: last_mean,
                policy_loss: stats.loss.policy,
                value_loss: stats.loss.value,
                entropy: stats.loss.entropy,
                clip_fraction: stats.loss.clip_fraction,
            });
            buffer.clear();
            rollout_episodes.clear();
            rollout_steps = 0;
        }
    }
    Ok(TrainOutput { agent, curve, episode_rewards })
}
