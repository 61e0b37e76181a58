//! Deterministic execution of one scheduling period.
//!
//! Resources and their discipline:
//!
//! * the local CPU: FCFS, every local task of the period is released at the
//!   period start and served in offload order `O`;
//! * the GU crypto unit: FCFS in `O`, encrypts each offloaded task;
//! * the GU uplink radio: FCFS in `O` across all satellites, a task starts
//!   transmitting once it is encrypted and the radio is free, at the rate the
//!   target satellite offers at that instant;
//! * one FCFS server per satellite, fed in arrival (= `O`) order.
//!
//! Encryption of task `k+1` overlaps transmission of task `k`. Release times
//! of every resource carry over between periods in [`QueueState`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary;
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::link;
use crate::orbit::{self, SatelliteState};
use crate::workload::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeConfig {
    /// CPU cycles per bit on the GU.
    pub q_local: f64,
    pub f_local_hz: f64,
    /// Encryption cycles per bit.
    pub q_en: f64,
    pub f_en_hz: f64,
    /// Hardware coefficient k, W s^3 / cycle^3.
    pub k_hw: f64,
    /// Per-satellite cycles per bit.
    pub q_sat: Vec<f64>,
    pub f_sat_hz: Vec<f64>,
}

/// Satellite constants are not part of the reference setup; 80 cycles/bit at
/// 10 GHz is an assumed default.
pub const DEFAULT_Q_SAT: f64 = 80.0;
pub const DEFAULT_F_SAT_HZ: f64 = 10e9;

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            q_local: 80.0,
            f_local_hz: 6.5e9,
            q_en: 20.0,
            f_en_hz: 3e9,
            k_hw: 1e-31,
            q_sat: vec![DEFAULT_Q_SAT; 12],
            f_sat_hz: vec![DEFAULT_F_SAT_HZ; 12],
        }
    }
}

impl ComputeConfig {
    /// Resizes the per-satellite vectors, repeating the last entry (or the
    /// defaults when empty).
    pub fn resize(&mut self, satellites: usize) {
        let q = self.q_sat.last().copied().unwrap_or(DEFAULT_Q_SAT);
        let f = self.f_sat_hz.last().copied().unwrap_or(DEFAULT_F_SAT_HZ);
        self.q_sat.resize(satellites, q);
        self.f_sat_hz.resize(satellites, f);
    }

    pub fn validate(&self, satellites: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive")))
            }
        };
        positive("q_local", self.q_local)?;
        positive("f_local_hz", self.f_local_hz)?;
        positive("f_en_hz", self.f_en_hz)?;
        positive("k_hw", self.k_hw)?;
        if !(self.q_en >= 0.0) {
            return Err(Error::InvalidArgument("q_en must be >= 0".into()));
        }
        if self.q_sat.len() != satellites || self.f_sat_hz.len() != satellites {
            return Err(Error::InvalidArgument(format!(
                "per-satellite compute constants must have {satellites} entries"
            )));
        }
        for (&q, &f) in self.q_sat.iter().zip(&self.f_sat_hz) {
            positive("q_sat", q)?;
            positive("f_sat_hz", f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Weight of energy (J) against delay (s).
    pub beta1: f64,
    /// Weight of successful attacks.
    pub beta2: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { beta1: 1.0, beta2: 1.0 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 >= 0.0 && self.beta2 >= 0.0) {
            return Err(Error::InvalidArgument("cost weights must be >= 0".into()));
        }
        Ok(())
    }

    pub fn cost(&self, makespan: f64, energy: f64, attacks: f64) -> f64 {
        makespan + self.beta1 * energy + self.beta2 * attacks
    }
}

pub fn local_compute_time(data_bits: u64, cfg: &ComputeConfig) -> f64 {
    data_bits as f64 * cfg.q_local / cfg.f_local_hz
}

/// Waiting time plus local service time.
pub fn local_latency(data_bits: u64, cfg: &ComputeConfig, wait: f64) -> f64 {
    wait + local_compute_time(data_bits, cfg)
}

pub fn encryption_time(data_bits: u64, cfg: &ComputeConfig) -> f64 {
    data_bits as f64 * cfg.q_en / cfg.f_en_hz
}

/// `D / R`; a zero rate means the destination should have been masked.
pub fn transmission_time(data_bits: u64, rate: f64, satellite: usize) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InfeasibleLink { satellite });
    }
    Ok(data_bits as f64 / rate)
}

pub fn satellite_compute_time(data_bits: u64, satellite: usize, cfg: &ComputeConfig) -> f64 {
    data_bits as f64 * cfg.q_sat[satellite] / cfg.f_sat_hz[satellite]
}

/// `k f_local^3 t`.
pub fn local_energy(compute_time: f64, cfg: &ComputeConfig) -> f64 {
    cfg.k_hw * cfg.f_local_hz.powi(3) * compute_time
}

pub fn encryption_energy(encryption_time: f64, cfg: &ComputeConfig) -> f64 {
    cfg.k_hw * cfg.f_en_hz.powi(3) * encryption_time
}

/// Encryption energy plus radio energy `P D / R`.
pub fn offload_energy(
    task: &Task,
    rate: f64,
    satellite: usize,
    cfg: &ComputeConfig,
    tx_power_w: f64,
) -> Result<f64> {
    let tx = transmission_time(task.data_bits, rate, satellite)?;
    Ok(encryption_energy(encryption_time(task.data_bits, cfg), cfg) + tx_power_w * tx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Destination {
    Local,
    /// Zero-based satellite index.
    Satellite(usize),
}

impl Destination {
    /// Position in the per-task action block: 0 is local, `j + 1` is satellite `j`.
    pub fn slot(self) -> usize {
        match self {
            Destination::Local => 0,
            Destination::Satellite(j) => j + 1,
        }
    }

    pub fn from_slot(slot: usize) -> Self {
        if slot == 0 {
            Destination::Local
        } else {
            Destination::Satellite(slot - 1)
        }
    }
}

/// Allocation and offload order for one period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodDecision {
    /// Destination of task `i`.
    pub assignment: Vec<Destination>,
    /// Task indices in offload order.
    pub order: Vec<usize>,
}

impl PeriodDecision {
    pub fn all_local(tasks: usize) -> Self {
        Self { assignment: vec![Destination::Local; tasks], order: (0..tasks).collect() }
    }

    pub fn validate(&self, tasks: usize, satellites: usize) -> Result<()> {
        if self.assignment.len() != tasks {
            return Err(Error::ContractViolation(format!(
                "decision assigns {} tasks, period has {tasks}",
                self.assignment.len()
            )));
        }
        let mut seen = vec![false; tasks];
        for &i in &self.order {
            if i >= tasks || std::mem::replace(&mut seen[i], true) {
                return Err(Error::ContractViolation("order is not a permutation".into()));
            }
        }
        if self.order.len() != tasks {
            return Err(Error::ContractViolation("order is not a permutation".into()));
        }
        if let Some(Destination::Satellite(j)) =
            self.assignment.iter().find(|d| matches!(d, Destination::Satellite(j) if *j >= satellites))
        {
            return Err(Error::ContractViolation(format!("satellite {j} does not exist")));
        }
        Ok(())
    }
}

/// Release times of every FCFS resource, absolute seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub local_release: f64,
    pub crypto_release: f64,
    pub uplink_release: f64,
    pub satellite_release: Vec<f64>,
}

impl QueueState {
    pub fn new(satellites: usize) -> Self {
        Self {
            local_release: 0.0,
            crypto_release: 0.0,
            uplink_release: 0.0,
            satellite_release: vec![0.0; satellites],
        }
    }
}

/// Fixed inputs of a period: the scenario, the period's tasks, satellite
/// positions at the period start and the start time itself.
#[derive(Debug, Clone, Copy)]
pub struct PeriodContext<'a> {
    pub scenario: &'a Scenario,
    pub tasks: &'a [Task],
    pub satellites: &'a [SatelliteState],
    pub t0: f64,
}

impl PeriodContext<'_> {
    pub fn is_visible(&self, satellite: usize) -> bool {
        self.satellites
            .get(satellite)
            .is_some_and(|s| orbit::is_visible(s, &self.scenario.constellation))
    }

    /// Link seen by `satellite` at absolute time `t` (the satellite keeps
    /// moving during the period).
    pub fn link_at(&self, satellite: usize, t: f64) -> link::LinkMetrics {
        let c = &self.scenario.constellation;
        let gamma = orbit::gamma_after(self.satellites[satellite].gamma_deg, c, t - self.t0);
        let range = orbit::slant_range(gamma, c.earth_radius_km, c.orbit_altitude_km);
        link::metrics(range, &self.scenario.link)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPlan {
    pub start: f64,
    pub end: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffloadPlan {
    pub satellite: usize,
    pub encrypt_start: f64,
    pub encrypt_end: f64,
    pub tx_start: f64,
    pub tx_end: f64,
    pub compute_start: f64,
    pub end: f64,
    pub rate: f64,
    pub ber: f64,
    pub success_prob: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Plan {
    Local(LocalPlan),
    Offload(OffloadPlan),
}

impl Plan {
    pub fn start(&self) -> f64 {
        match self {
            Plan::Local(p) => p.start,
            Plan::Offload(p) => p.encrypt_start,
        }
    }

    pub fn end(&self) -> f64 {
        match self {
            Plan::Local(p) => p.end,
            Plan::Offload(p) => p.end,
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            Plan::Local(p) => p.energy,
            Plan::Offload(p) => p.energy,
        }
    }

    pub fn success_prob(&self) -> f64 {
        match self {
            Plan::Local(_) => 1.0,
            Plan::Offload(p) => p.success_prob,
        }
    }
}

impl QueueState {
    /// Timing, energy and reliability of appending `task` to the current
    /// queues, without committing it.
    pub fn plan(&self, ctx: &PeriodContext<'_>, task: &Task, dest: Destination) -> Result<Plan> {
        let compute = &ctx.scenario.compute;
        match dest {
            Destination::Local => {
                let start = ctx.t0.max(self.local_release);
                let service = local_compute_time(task.data_bits, compute);
                Ok(Plan::Local(LocalPlan {
                    start,
                    end: start + service,
                    energy: local_energy(service, compute),
                }))
            }
            Destination::Satellite(j) => {
                if j >= self.satellite_release.len() {
                    return Err(Error::ContractViolation(format!("satellite {j} does not exist")));
                }
                if !ctx.is_visible(j) {
                    return Err(Error::ContractViolation(format!(
                        "satellite {j} is not visible at the period start"
                    )));
                }
                let encrypt_start = ctx.t0.max(self.crypto_release);
                let encrypt_end = encrypt_start + encryption_time(task.data_bits, compute);
                let tx_start = encrypt_end.max(self.uplink_release);
                let link = ctx.link_at(j, tx_start);
                let tx_end = tx_start + transmission_time(task.data_bits, link.rate, j)?;
                let compute_start = tx_end.max(self.satellite_release[j]);
                let end = compute_start + satellite_compute_time(task.data_bits, j, compute);
                Ok(Plan::Offload(OffloadPlan {
                    satellite: j,
                    encrypt_start,
                    encrypt_end,
                    tx_start,
                    tx_end,
                    compute_start,
                    end,
                    rate: link.rate,
                    ber: link.ber,
                    success_prob: link::task_success_prob(link.ber, task.data_bits, true, true),
                    energy: offload_energy(task, link.rate, j, compute, ctx.scenario.link.tx_power_w)?,
                }))
            }
        }
    }

    pub fn commit(&mut self, plan: &Plan) {
        match plan {
            Plan::Local(p) => self.local_release = p.end,
            Plan::Offload(p) => {
                self.crypto_release = p.encrypt_end;
                self.uplink_release = p.tx_end;
                self.satellite_release[p.satellite] = p.end;
            }
        }
    }
}

/// How attacks enter the period cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AttackMode {
    /// Monte Carlo draw per offloaded task.
    #[default]
    Sampled,
    /// Expected attack count `1 - E[S]` per offloaded task (no randomness).
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: usize,
    pub destination: Destination,
    pub start: f64,
    pub end: f64,
    pub energy: f64,
    /// 0/1 when sampled, expectation otherwise.
    pub attack: f64,
    pub success_prob: f64,
    pub ber: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodOutcome {
    /// One record per task, in offload order.
    pub records: Vec<TaskRecord>,
    /// Latest completion minus the period start.
    pub makespan: f64,
    pub energy: f64,
    pub attacks: f64,
    /// Analytic probability that the whole period offloads successfully.
    pub success_prob: f64,
    pub cost: f64,
}

/// Runs one period and returns its outcome together with the carried-over
/// queue state.
pub fn execute_period<R: Rng + ?Sized>(
    ctx: &PeriodContext<'_>,
    decision: &PeriodDecision,
    queues: &QueueState,
    adversary_rng: &mut R,
    attack_mode: AttackMode,
) -> Result<(PeriodOutcome, QueueState)> {
    decision.validate(ctx.tasks.len(), queues.satellite_release.len())?;
    let adversary_cfg = &ctx.scenario.adversary;
    let mut queues = queues.clone();
    let mut records = Vec::with_capacity(ctx.tasks.len());
    let mut latest = ctx.t0;
    let mut energy = 0.0;
    let mut attacks = 0.0;
    let mut success_prob = 1.0;

    for &i in &decision.order {
        let task = &ctx.tasks[i];
        let dest = decision.assignment[i];
        let plan = queues.plan(ctx, task, dest)?;
        queues.commit(&plan);

        let attack = match dest {
            Destination::Local => 0.0,
            Destination::Satellite(_) => match attack_mode {
                AttackMode::Sampled => {
                    if adversary::sample_attack(task, adversary_rng, adversary_cfg) {
                        1.0
                    } else {
                        0.0
                    }
                }
                AttackMode::Expected => adversary::expected_attack(task, adversary_cfg),
            },
        };

        latest = latest.max(plan.end());
        energy += plan.energy();
        attacks += attack;
        success_prob *= plan.success_prob();
        records.push(TaskRecord {
            task_id: task.id,
            destination: dest,
            start: plan.start(),
            end: plan.end(),
            energy: plan.energy(),
            attack,
            success_prob: plan.success_prob(),
            ber: match plan {
                Plan::Offload(p) => Some(p.ber),
                Plan::Local(_) => None,
            },
        });
    }

    let makespan = latest - ctx.t0;
    let outcome = PeriodOutcome {
        records,
        makespan,
        energy,
        attacks,
        success_prob,
        cost: ctx.scenario.weights.cost(makespan, energy, attacks),
    };
    Ok((outcome, queues))
}
