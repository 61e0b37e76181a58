//! Static schedulers and the micro-step driver shared with learned policies.
//!
//! Every scheduler emits a whole [`PeriodDecision`] at the start of a period
//! and only ever picks actions the environment's mask leaves open.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EpisodeSummary, OffloadEnv, Planner};
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::sim::{execute_period, AttackMode, Destination, PeriodDecision};

/// Anything that can pick the next micro-step action.
pub trait Policy {
    fn act(&mut self, env: &OffloadEnv) -> Result<usize>;
}

/// A scheduler that decides a full period at once.
pub trait Scheduler {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Greedy,
    RoundRobin,
    AllLocal,
    AllOffloading,
    Random,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Greedy,
        BaselineKind::RoundRobin,
        BaselineKind::AllLocal,
        BaselineKind::AllOffloading,
        BaselineKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Greedy => "greedy",
            BaselineKind::RoundRobin => "round_robin",
            BaselineKind::AllLocal => "all_local",
            BaselineKind::AllOffloading => "all_offloading",
            BaselineKind::Random => "random",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == norm || (norm == "rr" && *k == BaselineKind::RoundRobin))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown baseline '{s}'")))
    }
}

/// Builds a boxed policy for `kind`. Randomised baselines draw from the
/// `greedy` substream of `seed`.
pub fn make_baseline(kind: BaselineKind, greedy_samples: usize, seed: u64) -> Box<dyn Policy> {
    let rng = rng::substream(seed, rng::GREEDY);
    match kind {
        BaselineKind::Greedy => Box::new(SchedulerPolicy::new(Greedy::new(greedy_samples, rng))),
        BaselineKind::RoundRobin => Box::new(SchedulerPolicy::new(RoundRobin)),
        BaselineKind::AllLocal => Box::new(SchedulerPolicy::new(AllLocal)),
        BaselineKind::AllOffloading => Box::new(SchedulerPolicy::new(AllOffloading)),
        BaselineKind::Random => Box::new(SchedulerPolicy::new(RandomScheduler { rng })),
    }
}

/// Replays a scheduler's period decision one micro-step at a time.
pub struct SchedulerPolicy<S> {
    scheduler: S,
    queued: VecDeque<usize>,
}

impl<S: Scheduler> SchedulerPolicy<S> {
    pub fn new(scheduler: S) -> Self {
        Self { scheduler, queued: VecDeque::new() }
    }
}

impl<S: Scheduler> Policy for SchedulerPolicy<S> {
    fn act(&mut self, env: &OffloadEnv) -> Result<usize> {
        if env.decided_count() == 0 {
            let d = self.scheduler.decide(env)?;
            self.queued = d.order.iter().map(|&i| env.encode_action(i, d.assignment[i])).collect();
        }
        self.queued
            .pop_front()
            .ok_or_else(|| Error::ContractViolation("scheduler ran out of actions".into()))
    }
}

/// Runs `policy` until the episode ends and returns the episode totals.
pub fn run_episode(env: &mut OffloadEnv, policy: &mut dyn Policy, seed: u64) -> Result<EpisodeSummary> {
    env.reset(seed);
    while !env.is_done() {
        let action = policy.act(env)?;
        env.step(action)?;
    }
    Ok(env.summary().clone())
}

/// Places pending tasks in a random order, each at a uniformly random open
/// destination.
pub fn sample_feasible<R: Rng + ?Sized>(mut planner: Planner<'_>, rng: &mut R) -> Result<PeriodDecision> {
    let mut pending: Vec<usize> = planner.pending().collect();
    pending.shuffle(rng);
    let slots = planner.satellites().len() + 1;
    for i in pending {
        let open: Vec<Destination> =
            (0..slots).map(Destination::from_slot).filter(|&d| planner.allows(i, d)).collect();
        let dest = open[rng.random_range(0..open.len())];
        planner.push(i, dest)?;
    }
    Ok(planner.decision().expect("every task placed"))
}

/// Best of `samples` random feasible decisions, scored by the period cost
/// with expected attacks.
pub struct Greedy {
    pub samples: usize,
    rng: SimRng,
}

impl Greedy {
    pub fn new(samples: usize, rng: SimRng) -> Self {
        Self { samples: samples.max(1), rng }
    }
}

impl Scheduler for Greedy {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision> {
        let ctx = env.context();
        let mut best: Option<(f64, PeriodDecision)> = None;
        // Expected mode never touches the rng.
        let mut unused = rng::substream(0, rng::ADVERSARY);
        for _ in 0..self.samples {
            let d = sample_feasible(env.planner(), &mut self.rng)?;
            let (out, _) = execute_period(&ctx, &d, env.queues(), &mut unused, AttackMode::Expected)?;
            if best.as_ref().is_none_or(|(c, _)| out.cost < *c) {
                best = Some((out.cost, d));
            }
        }
        Ok(best.expect("at least one sample").1)
    }
}

/// Cycles Local, sat 0, ..., sat J-1 over tasks in index order, skipping
/// closed destinations; the cycle restarts every period.
pub struct RoundRobin;

impl Scheduler for RoundRobin {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision> {
        let mut planner = env.planner();
        let slots = env.satellites().len() + 1;
        let mut cursor = 0;
        for i in 0..env.tasks().len() {
            let slot = (0..slots)
                .map(|k| (cursor + k) % slots)
                .find(|&s| planner.allows(i, Destination::from_slot(s)))
                .expect("local is always open");
            planner.push(i, Destination::from_slot(slot))?;
            cursor = (slot + 1) % slots;
        }
        Ok(planner.decision().expect("every task placed"))
    }
}

pub struct AllLocal;

impl Scheduler for AllLocal {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision> {
        Ok(PeriodDecision::all_local(env.tasks().len()))
    }
}

/// Offloads every task, cycling over visible satellites nearest first; a
/// task with no open satellite stays local.
pub struct AllOffloading;

impl Scheduler for AllOffloading {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision> {
        let mut planner = env.planner();
        let ctx = env.context();
        let mut nearest: Vec<usize> = (0..env.satellites().len()).filter(|&j| ctx.is_visible(j)).collect();
        nearest.sort_by(|&a, &b| env.satellites()[a].slant_range_km.total_cmp(&env.satellites()[b].slant_range_km));
        let mut cursor = 0;
        for i in 0..env.tasks().len() {
            let pick = (0..nearest.len())
                .map(|k| (cursor + k) % nearest.len())
                .find(|&k| planner.allows(i, Destination::Satellite(nearest[k])));
            match pick {
                Some(k) => {
                    planner.push(i, Destination::Satellite(nearest[k]))?;
                    cursor = (k + 1) % nearest.len();
                }
                None => planner.push(i, Destination::Local)?,
            }
        }
        Ok(planner.decision().expect("every task placed"))
    }
}

/// One random feasible decision per period.
pub struct RandomScheduler {
    rng: SimRng,
}

impl RandomScheduler {
    pub fn new(rng: SimRng) -> Self {
        Self { rng }
    }
}

impl Scheduler for RandomScheduler {
    fn decide(&mut self, env: &OffloadEnv) -> Result<PeriodDecision> {
        sample_feasible(env.planner(), &mut self.rng)
    }
}
