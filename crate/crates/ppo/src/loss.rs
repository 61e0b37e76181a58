//! PPO objective terms and generalized advantage estimation.

/// GAE over a rollout. `dones[t]` marks that step `t` ended an episode;
/// `last_value` bootstraps a rollout cut mid-episode. Returns
/// `(advantages, returns)` with `returns = advantages + values`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "misaligned rollout");
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let delta = rewards[t] + gamma * next_value * not_done - values[t];
        running = delta + gamma * lambda * not_done * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// `min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv)` for one sample.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip_range: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_range, 1.0 + clip_range);
    (ratio * advantage).min(clipped * advantage)
}

/// Mean clipped surrogate (to be maximized).
pub fn clipped_policy_loss(log_prob_new: &[f64], log_prob_old: &[f64], advantages: &[f64], clip_range: f64) -> f64 {
    let n = log_prob_new.len();
    (0..n)
        .map(|i| clipped_surrogate((log_prob_new[i] - log_prob_old[i]).exp(), advantages[i], clip_range))
        .sum::<f64>()
        / n as f64
}

/// Mean squared error.
pub fn value_loss(predicted: &[f64], returns: &[f64]) -> f64 {
    predicted.iter().zip(returns).map(|(v, r)| (v - r) * (v - r)).sum::<f64>() / predicted.len() as f64
}

/// `L = L_clip - c1 * L_vf + c2 * S`, maximized.
pub fn total_loss(policy: f64, value: f64, entropy: f64, value_coef: f64, entropy_coef: f64) -> f64 {
    policy - value_coef * value + entropy_coef * entropy
}

/// Shifts and scales to mean 0, (population) stdev 1.
pub fn normalize(x: &mut [f64]) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return;
    }
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt() + 1e-8;
    x.iter_mut().for_each(|v| *v = (*v - mean) / std);
}
