//! Paired comparison of policies evaluated on common episode seeds.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::EpisodeRow;
use crate::stats::{mean, sign_test, SignTest};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub sweep_value: Option<f64>,
    pub policy: String,
    pub episodes: usize,
    pub mean_cost: f64,
    /// Competition ranking on mean cost: equal means share a rank.
    pub rank: usize,
    /// Sign test of this policy's cost minus the best policy's cost.
    pub p_worse_than_best: f64,
}

type Key = (u64, u64);

/// Per sweep value and policy: costs keyed by `(seed, episode_seed)`.
fn group(rows: &[EpisodeRow]) -> Result<BTreeMap<Option<u64>, BTreeMap<String, BTreeMap<Key, f64>>>> {
    let mut out: BTreeMap<Option<u64>, BTreeMap<String, BTreeMap<Key, f64>>> = BTreeMap::new();
    for r in rows {
        let slot = out.entry(r.sweep_value.map(f64::to_bits)).or_default().entry(r.policy.clone()).or_default();
        if slot.insert((r.seed, r.episode_seed), r.cost).is_some() {
            return Err(Error::MismatchedSeeds(format!(
                "policy {} has episode seed {} twice for seed {}",
                r.policy, r.episode_seed, r.seed
            )));
        }
    }
    for (value, policies) in &out {
        let mut iter = policies.iter();
        let Some((first_name, first)) = iter.next() else { continue };
        let keys: BTreeSet<&Key> = first.keys().collect();
        for (name, costs) in iter {
            if costs.keys().collect::<BTreeSet<_>>() != keys {
                return Err(Error::MismatchedSeeds(format!(
                    "policies {first_name} and {name} were evaluated on different episode seeds (sweep value {:?})",
                    value.map(f64::from_bits)
                )));
            }
        }
    }
    Ok(out)
}

/// Sign test on per-episode `cost(a) - cost(b)` for one sweep value.
pub fn paired_cost_test(rows: &[EpisodeRow], sweep_value: Option<f64>, a: &str, b: &str) -> Result<SignTest> {
    let groups = group(rows)?;
    let policies = groups
        .get(&sweep_value.map(f64::to_bits))
        .ok_or_else(|| Error::invalid("sweep_value", format!("no rows for {sweep_value:?}")))?;
    let get = |p: &str| policies.get(p).ok_or_else(|| Error::invalid("policy", format!("no rows for policy {p}")));
    let (ca, cb) = (get(a)?, get(b)?);
    let diffs: Vec<f64> = ca.iter().map(|(k, v)| v - cb[k]).collect();
    Ok(sign_test(&diffs))
}

/// Ranks policies by mean cost within each sweep value.
pub fn rank(rows: &[EpisodeRow]) -> Result<Vec<RankRow>> {
    let groups = group(rows)?;
    let mut out = Vec::new();
    for (value, policies) in groups {
        let mut means: Vec<(String, f64, usize)> = policies
            .iter()
            .map(|(name, costs)| (name.clone(), mean(&costs.values().copied().collect::<Vec<_>>()), costs.len()))
            .collect();
        means.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let best = policies[&means[0].0].clone();
        let mut prev: Option<f64> = None;
        let mut rank = 0;
        for (i, (name, m, n)) in means.into_iter().enumerate() {
            if prev != Some(m) {
                rank = i + 1;
                prev = Some(m);
            }
            let diffs: Vec<f64> = policies[&name].iter().map(|(k, v)| v - best[k]).collect();
            out.push(RankRow {
                sweep_value: value.map(f64::from_bits),
                policy: name,
                episodes: n,
                mean_cost: m,
                rank,
                p_worse_than_best: sign_test(&diffs).p_greater,
            });
        }
    }
    Ok(out)
}
