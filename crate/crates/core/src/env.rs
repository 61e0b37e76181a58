//! Markov decision process over scheduling periods.
//!
//! A period of `I` tasks is decided in `I` micro-steps. Each micro-step picks
//! one pending task and its destination; the `k`-th pick takes position `k`
//! of the offload order. The flattened action index is `i * (J + 1) + d`
//! where `d = 0` is local and `d = j + 1` is satellite `j`.
//!
//! Rewards are zero on intermediate micro-steps. The last micro-step of a
//! period executes the accumulated decision and returns
//! `-(makespan + beta1 * E + beta2 * A)`.
//!
//! # Observation layout
//!
//! `I * 5 + J * 6 + 5` values:
//!
//! * per task slot: `[pending, D / lambda, low, medium, high]` (all zero once
//!   the task has been scheduled);
//! * per satellite: `[sin gamma, cos gamma, visible, backlog / scale,
//!   ber_score, spectral / 32]` where backlog includes work committed earlier
//!   in the current period, `ber_score = clamp(-log10(BER) / 20, 0, 1)` and
//!   `spectral = log2(1 + SNR)` at the period start;
//! * global: `[local backlog / scale, uplink backlog / scale, running
//!   success product, t / (period_length * T), decided / I]`.
//!
//! # Feasibility mask
//!
//! An action is open when its task is pending and either its destination is
//! local, or the satellite is visible at the period start, offers a nonzero
//! rate, and (in mask mode) the running success product times the task's own
//! success probability stays at or above `rho + rho_margin`. The task's success
//! probability is taken at the exact transmission start the task would get if
//! appended to the current order, which is also what execution uses, so the
//! executed product never falls below the masked bound.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::orbit::{self, SatelliteState};
use crate::rng::{self, SimRng};
use crate::sim::{
    execute_period, local_compute_time, AttackMode, Destination, PeriodContext, PeriodDecision,
    PeriodOutcome, QueueState,
};
use crate::workload::{generate_period, Task};

pub const TASK_FEATURES: usize = 5;
pub const SATELLITE_FEATURES: usize = 6;
pub const GLOBAL_FEATURES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    /// Actions that would break the reliability constraint are masked.
    #[default]
    Mask,
    /// Nothing is masked for reliability; a violating period pays `rho_penalty`.
    Penalty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Periods per episode, T.
    pub periods: usize,
    /// Time between period starts, seconds.
    pub period_length_s: f64,
    /// Divisor for backlog seconds in observations.
    pub obs_backlog_scale_s: f64,
    /// Minimum period success probability.
    pub rho: f64,
    /// Extra safety margin added to rho when masking.
    pub rho_margin: f64,
    pub rho_mode: RhoMode,
    pub rho_penalty: f64,
    pub attack_mode: AttackMode,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            periods: 50,
            period_length_s: 60.0,
            obs_backlog_scale_s: 60.0,
            rho: 0.7,
            rho_margin: 0.0,
            rho_mode: RhoMode::Mask,
            rho_penalty: 100.0,
            attack_mode: AttackMode::Sampled,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.periods == 0 {
            return bad("periods must be >= 1");
        }
        if !(self.period_length_s > 0.0) {
            return bad("period_length_s must be positive");
        }
        if !(self.obs_backlog_scale_s > 0.0) {
            return bad("obs_backlog_scale_s must be positive");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho out of [0,1]");
        }
        if !(self.rho_margin >= 0.0) {
            return bad("rho_margin must be >= 0");
        }
        if !(self.rho_penalty >= 0.0) {
            return bad("rho_penalty must be >= 0");
        }
        Ok(())
    }
}

/// Per-period decision progress: projected queues after the tasks decided
/// so far and the running success product.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanState {
    pub queues: QueueState,
    pub running_product: f64,
    pub assignment: Vec<Option<Destination>>,
    pub order: Vec<usize>,
}

impl PlanState {
    fn new(queues: &QueueState, tasks: usize) -> Self {
        Self {
            queues: queues.clone(),
            running_product: 1.0,
            assignment: vec![None; tasks],
            order: Vec::with_capacity(tasks),
        }
    }
}

/// Read-only view of the current period used to test and extend partial
/// decisions. Baselines work on a planner so they share the agent's mask.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    pub ctx: PeriodContext<'a>,
    cfg: &'a EnvConfig,
    state: PlanState,
}

impl<'a> Planner<'a> {
    pub fn tasks(&self) -> &'a [Task] {
        self.ctx.tasks
    }

    pub fn satellites(&self) -> &'a [SatelliteState] {
        self.ctx.satellites
    }

    pub fn state(&self) -> &PlanState {
        &self.state
    }

    pub fn is_pending(&self, task: usize) -> bool {
        self.state.assignment.get(task).is_some_and(Option::is_none)
    }

    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ctx.tasks.len()).filter(|&i| self.is_pending(i))
    }

    pub fn is_complete(&self) -> bool {
        self.state.order.len() == self.ctx.tasks.len()
    }

    /// Whether `(task, dest)` is an open action.
    pub fn allows(&self, task: usize, dest: Destination) -> bool {
        if !self.is_pending(task) {
            return false;
        }
        let j = match dest {
            Destination::Local => return true,
            Destination::Satellite(j) => j,
        };
        if !self.ctx.is_visible(j) {
            return false;
        }
        let Ok(plan) = self.state.queues.plan(&self.ctx, &self.ctx.tasks[task], dest) else {
            return false;
        };
        match self.cfg.rho_mode {
            RhoMode::Mask => {
                self.state.running_product * plan.success_prob() >= self.cfg.rho + self.cfg.rho_margin
            }
            RhoMode::Penalty => true,
        }
    }

    /// Flattened mask over `I x (J + 1)`.
    pub fn mask(&self) -> Vec<bool> {
        let slots = self.ctx.satellites.len() + 1;
        let mut mask = Vec::with_capacity(self.ctx.tasks.len() * slots);
        for i in 0..self.ctx.tasks.len() {
            for slot in 0..slots {
                mask.push(self.allows(i, Destination::from_slot(slot)));
            }
        }
        mask
    }

    /// Appends `(task, dest)` to the partial decision.
    pub fn push(&mut self, task: usize, dest: Destination) -> Result<()> {
        if !self.allows(task, dest) {
            return Err(Error::ContractViolation(format!("action (task {task}, {dest:?}) is masked")));
        }
        let plan = self.state.queues.plan(&self.ctx, &self.ctx.tasks[task], dest)?;
        self.state.queues.commit(&plan);
        self.state.running_product *= plan.success_prob();
        self.state.assignment[task] = Some(dest);
        self.state.order.push(task);
        Ok(())
    }

    /// The full decision once every task is placed.
    pub fn decision(&self) -> Option<PeriodDecision> {
        if !self.is_complete() {
            return None;
        }
        Some(PeriodDecision {
            assignment: self.state.assignment.iter().map(|d| d.expect("complete")).collect(),
            order: self.state.order.clone(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub periods: usize,
    /// Sum of per-period makespans.
    pub makespan: f64,
    pub energy: f64,
    pub attacks: f64,
    pub cost: f64,
    pub reward: f64,
    /// Smallest analytic period success probability seen.
    pub min_success_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub period_done: bool,
    pub episode_done: bool,
    /// Present on the last micro-step of a period.
    pub outcome: Option<PeriodOutcome>,
}

/// One episode of `T` periods for a single ground user.
#[derive(Debug, Clone)]
pub struct OffloadEnv {
    scenario: Scenario,
    workload_rng: SimRng,
    adversary_rng: SimRng,
    period: usize,
    time: f64,
    tasks: Vec<Task>,
    satellites: Vec<SatelliteState>,
    queues: QueueState,
    plan: PlanState,
    done: bool,
    summary: EpisodeSummary,
}

impl OffloadEnv {
    pub fn new(scenario: Scenario, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let j = scenario.satellite_count();
        let mut env = Self {
            workload_rng: rng::substream(seed, rng::WORKLOAD),
            adversary_rng: rng::substream(seed, rng::ADVERSARY),
            period: 0,
            time: 0.0,
            tasks: Vec::new(),
            satellites: Vec::new(),
            queues: QueueState::new(j),
            plan: PlanState::new(&QueueState::new(j), 0),
            done: false,
            summary: EpisodeSummary::default(),
            scenario,
        };
        env.reset(seed);
        Ok(env)
    }

    /// Starts a new episode: empty queues, satellites at their initial
    /// angles, first period generated. Returns the first observation.
    pub fn reset(&mut self, seed: u64) -> Vec<f64> {
        let j = self.scenario.satellite_count();
        self.workload_rng = rng::substream(seed, rng::WORKLOAD);
        self.adversary_rng = rng::substream(seed, rng::ADVERSARY);
        self.period = 0;
        self.time = 0.0;
        self.satellites = orbit::initial_states(&self.scenario.constellation);
        self.queues = QueueState::new(j);
        self.done = false;
        self.summary = EpisodeSummary { min_success_prob: 1.0, ..Default::default() };
        self.begin_period();
        self.observation()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn observation_len(&self) -> usize {
        observation_len(&self.scenario)
    }

    pub fn action_count(&self) -> usize {
        action_count(&self.scenario)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn satellites(&self) -> &[SatelliteState] {
        &self.satellites
    }

    pub fn queues(&self) -> &QueueState {
        &self.queues
    }

    pub fn running_product(&self) -> f64 {
        self.plan.running_product
    }

    pub fn decided_count(&self) -> usize {
        self.plan.order.len()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn summary(&self) -> &EpisodeSummary {
        &self.summary
    }

    pub fn context(&self) -> PeriodContext<'_> {
        PeriodContext {
            scenario: &self.scenario,
            tasks: &self.tasks,
            satellites: &self.satellites,
            t0: self.time,
        }
    }

    pub fn planner(&self) -> Planner<'_> {
        Planner { ctx: self.context(), cfg: &self.scenario.env, state: self.plan.clone() }
    }

    pub fn action_mask(&self) -> Vec<bool> {
        if self.done {
            return vec![false; self.action_count()];
        }
        self.planner().mask()
    }

    pub fn decode_action(&self, action: usize) -> Result<(usize, Destination)> {
        let slots = self.scenario.satellite_count() + 1;
        if action >= self.action_count() {
            return Err(Error::ContractViolation(format!("action {action} out of range")));
        }
        Ok((action / slots, Destination::from_slot(action % slots)))
    }

    pub fn encode_action(&self, task: usize, dest: Destination) -> usize {
        task * (self.scenario.satellite_count() + 1) + dest.slot()
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let (task, dest) = self.decode_action(action)?;
        let mut planner = self.planner();
        planner.push(task, dest)?;
        let decision = planner.decision();
        self.plan = planner.state;

        let Some(decision) = decision else {
            return Ok(StepResult {
                observation: self.observation(),
                reward: 0.0,
                period_done: false,
                episode_done: false,
                outcome: None,
            });
        };

        let (outcome, reward) = self.finish_period(&decision)?;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            period_done: true,
            episode_done: self.done,
            outcome: Some(outcome),
        })
    }

    fn finish_period(&mut self, decision: &PeriodDecision) -> Result<(PeriodOutcome, f64)> {
        let ctx = PeriodContext {
            scenario: &self.scenario,
            tasks: &self.tasks,
            satellites: &self.satellites,
            t0: self.time,
        };
        let (outcome, queues) = execute_period(
            &ctx,
            decision,
            &self.queues,
            &mut self.adversary_rng,
            self.scenario.env.attack_mode,
        )?;
        debug_assert_eq!(outcome.success_prob.to_bits(), self.plan.running_product.to_bits());

        let cfg = &self.scenario.env;
        let mut reward = -outcome.cost;
        if cfg.rho_mode == RhoMode::Penalty && outcome.success_prob < cfg.rho {
            reward -= cfg.rho_penalty;
        }
        self.summary.periods += 1;
        self.summary.makespan += outcome.makespan;
        self.summary.energy += outcome.energy;
        self.summary.attacks += outcome.attacks;
        self.summary.cost += outcome.cost;
        self.summary.reward += reward;
        self.summary.min_success_prob = self.summary.min_success_prob.min(outcome.success_prob);

        self.queues = queues;
        self.advance_period()?;
        Ok((outcome, reward))
    }

    fn advance_period(&mut self) -> Result<()> {
        let dt = self.scenario.env.period_length_s;
        self.time += dt;
        self.period += 1;
        self.satellites = orbit::advance(&self.scenario.constellation, &self.satellites, dt)?;
        for (s, &release) in self.satellites.iter_mut().zip(&self.queues.satellite_release) {
            s.backlog_release_time = release;
        }
        if self.period >= self.scenario.env.periods {
            self.done = true;
            self.tasks.clear();
            self.plan = PlanState::new(&self.queues, 0);
            return Ok(());
        }
        self.begin_period();
        Ok(())
    }

    fn begin_period(&mut self) {
        self.tasks = generate_period(&self.scenario.workload, &mut self.workload_rng);
        self.plan = PlanState::new(&self.queues, self.tasks.len());
        if self.tasks.is_empty() {
            // Nothing to decide: run the empty period straight away.
            let empty = PeriodDecision { assignment: Vec::new(), order: Vec::new() };
            self.finish_period(&empty).expect("empty period cannot fail");
        }
    }

    /// Encoded state; see the module docs for the layout.
    pub fn observation(&self) -> Vec<f64> {
        let s = &self.scenario;
        let scale = s.env.obs_backlog_scale_s;
        let lambda = s.workload.mean_data_bits;
        let t0 = self.time;
        let mut obs = Vec::with_capacity(self.observation_len());

        for i in 0..s.tasks_per_period() {
            match self.tasks.get(i) {
                Some(task) if self.plan.assignment[i].is_none() => {
                    obs.push(1.0);
                    obs.push(task.data_bits as f64 / lambda);
                    obs.extend(task.level.one_hot());
                }
                _ => obs.extend([0.0; TASK_FEATURES]),
            }
        }

        let ctx = self.context();
        for (j, sat) in self.satellites.iter().enumerate() {
            let gamma = sat.gamma_deg.to_radians();
            let link = ctx.link_at(j, t0);
            let ber_score = if link.ber > 0.0 { (-link.ber.log10() / 20.0).clamp(0.0, 1.0) } else { 1.0 };
            let spectral = (link.snr.ln_1p() / std::f64::consts::LN_2 / 32.0).clamp(0.0, 1.0);
            let backlog = (self.plan.queues.satellite_release[j] - t0).max(0.0) / scale;
            obs.extend([
                gamma.sin(),
                gamma.cos(),
                if ctx.is_visible(j) { 1.0 } else { 0.0 },
                backlog,
                ber_score,
                spectral,
            ]);
        }

        let horizon = s.env.period_length_s * s.env.periods as f64;
        let decided = if s.tasks_per_period() == 0 {
            0.0
        } else {
            self.plan.order.len() as f64 / s.tasks_per_period() as f64
        };
        obs.extend([
            (self.plan.queues.local_release - t0).max(0.0) / scale,
            (self.plan.queues.uplink_release - t0).max(0.0) / scale,
            self.plan.running_product,
            t0 / horizon,
            decided,
        ]);
        obs
    }

    /// Work the local CPU would still need for every pending task, seconds.
    pub fn pending_local_work(&self) -> f64 {
        self.planner()
            .pending()
            .map(|i| local_compute_time(self.tasks[i].data_bits, &self.scenario.compute))
            .sum()
    }

    /// Uniformly random open action.
    pub fn sample_open_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let open: Vec<usize> =
            self.action_mask().iter().enumerate().filter(|(_, &m)| m).map(|(a, _)| a).collect();
        if open.is_empty() {
            None
        } else {
            Some(open[rng.random_range(0..open.len())])
        }
    }
}

pub fn observation_len(scenario: &Scenario) -> usize {
    scenario.tasks_per_period() * TASK_FEATURES
        + scenario.satellite_count() * SATELLITE_FEATURES
        + GLOBAL_FEATURES
}

pub fn action_count(scenario: &Scenario) -> usize {
    scenario.tasks_per_period() * (scenario.satellite_count() + 1)
}
