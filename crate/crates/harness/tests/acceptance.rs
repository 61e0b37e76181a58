//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,2,7` restricts the run to the listed criteria.
//! Criteria listed in `KNOWN_RED` are reported but do not fail the binary;
//! every other failure exits nonzero.

#[path = "../../core/tests/support/event_oracle.rs"]
#[allow(dead_code)]
mod event_oracle;

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use event_oracle::{simulate, Releases};
use satedge_core::adversary::{sample_attack, AdversaryConfig};
use satedge_core::baselines::BaselineKind;
use satedge_core::env::OffloadEnv;
use satedge_core::link::{self, db_to_linear, LinkConfig};
use satedge_core::orbit;
use satedge_core::rng::{substream, ADVERSARY, WORKLOAD};
use satedge_core::sim::{self, execute_period, AttackMode, ComputeConfig, Destination, PeriodContext, PeriodDecision, QueueState};
use satedge_core::workload::{generate_period, SecurityLevel, Task};
use satedge_core::Scenario;
use satedge_harness::config::parse_value;
use satedge_harness::experiment::{run_training, RunOptions};
use satedge_harness::stats::{mean, nondecreasing, strictly_decreasing};
use satedge_harness::{load_config, run, EpisodeRow, ExperimentConfig, PolicySpec, SweepAxis};
use satedge_ppo::agent::{objective, Sample};
use satedge_ppo::dist;
use satedge_ppo::loss::{clipped_policy_loss, gae, total_loss, value_loss};
use satedge_ppo::nn::Mlp;
use satedge_ppo::PpoConfig;

/// Criteria whose failure is reported but tolerated; see the project notes.
const KNOWN_RED: &[u32] = &[];

const FORMULA_TOL: f64 = 1e-9;
const BER_TOL: f64 = 1e-6;
const QUEUE_TOL: f64 = 1e-12;
const ATTACK_TOL: f64 = 0.01;
const FD_TOL: f64 = 1e-4;
const GAE_TOL: f64 = 1e-10;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn desk_config(name: &str) -> ExperimentConfig {
    let mut c = load_config(None, &[("preset".into(), parse_value("desk"))]).expect("desk preset loads");
    c.out_dir = out_dir(name);
    c
}

// 1 ------------------------------------------------------------------------

fn formulas() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut worst_ber: f64 = 0.0;
    let (r, h) = (6371.0, 780.0);
    let link_cfg = LinkConfig::default();
    let compute = ComputeConfig::default();
    let mut rng = substream(1, "acceptance-formulas");
    for _ in 0..2000 {
        let gamma: f64 = rng.random_range(-10.0..10.0);
        // Law of cosines in the Earth-center triangle.
        let g = gamma.to_radians();
        let s_oracle = (r * r + (r + h) * (r + h) - 2.0 * r * (r + h) * g.cos()).sqrt();
        let s = orbit::slant_range(gamma, r, h);
        worst = worst.max(rel(s, s_oracle));

        let beta0_db: f64 = rng.random_range(-40.0..45.0);
        let beta0 = db_to_linear(beta0_db);
        let gain_oracle = 10f64.powf(beta0_db / 10.0 - 2.0 * s_oracle.log10());
        let gain = link::path_gain(s, beta0);
        worst = worst.max(rel(gain, gain_oracle));

        let snr_oracle = 10f64.powf((10.0 * (link_cfg.tx_power_w * gain_oracle).log10() - 10.0 * link_cfg.noise_power_w.log10()) / 10.0);
        let snr = link::snr(gain, &link_cfg);
        worst = worst.max(rel(snr, snr_oracle));

        let rate_oracle = link_cfg.bandwidth_hz * (1.0 + snr_oracle).log2();
        // log2(1 + x) loses digits for tiny x; compare there against the series.
        let rate_oracle = if snr_oracle < 1e-6 {
            link_cfg.bandwidth_hz * (snr_oracle - snr_oracle * snr_oracle / 2.0) / std::f64::consts::LN_2
        } else {
            rate_oracle
        };
        worst = worst.max(rel(link::shannon_rate(snr, link_cfg.bandwidth_hz), rate_oracle));

        let ber = link::bpsk_ber(snr);
        let ber_oracle = 0.5 * libm::erfc(snr_oracle.sqrt());
        if ber_oracle > 0.0 {
            worst_ber = worst_ber.max(rel(ber, ber_oracle));
        }

        let d: u64 = rng.random_range(1..400_000_000);
        let df = d as f64;
        let t_local = sim::local_compute_time(d, &compute);
        worst = worst.max(rel(t_local, df / (compute.f_local_hz / compute.q_local)));
        let wait: f64 = rng.random_range(0.0..30.0);
        worst = worst.max(rel(sim::local_latency(d, &compute, wait), wait + df * compute.q_local / compute.f_local_hz));
        worst = worst.max(rel(sim::local_energy(t_local, &compute), compute.k_hw * df * compute.q_local * compute.f_local_hz.powi(2)));
        let t_en = sim::encryption_time(d, &compute);
        worst = worst.max(rel(t_en, df / (compute.f_en_hz / compute.q_en)));
        worst = worst.max(rel(sim::encryption_energy(t_en, &compute), compute.k_hw * df * compute.q_en * compute.f_en_hz.powi(2)));
        let rate: f64 = rng.random_range(1e3..1e9);
        worst = worst.max(rel(sim::transmission_time(d, rate, 0).unwrap(), df / rate));
        let task = Task::new(0, d, SecurityLevel::Medium);
        let e_off = sim::offload_energy(&task, rate, 0, &compute, link_cfg.tx_power_w).unwrap();
        let e_oracle = compute.k_hw * df * compute.q_en * compute.f_en_hz.powi(2) + link_cfg.tx_power_w * df / rate;
        worst = worst.max(rel(e_off, e_oracle));
        let t_sat = sim::satellite_compute_time(d, 0, &compute);
        worst = worst.max(rel(t_sat, df / (compute.f_sat_hz[0] / compute.q_sat[0])));
    }
    // Reference constants: 20 MB at 80 cycles/bit on 6.5 GHz, and the
    // overhead distance H = 780 km.
    worst = worst.max(rel(sim::local_compute_time(160_000_000, &compute), 1.6e8 * 80.0 / 6.5e9));
    worst = worst.max(rel(orbit::slant_range(0.0, r, h), h));
    verdict(
        worst <= FORMULA_TOL && worst_ber <= BER_TOL,
        format!("max rel err {worst:.2e} (tol {FORMULA_TOL:e}), BER {worst_ber:.2e} (tol {BER_TOL:e})"),
    )
}

// 2 ------------------------------------------------------------------------

fn queueing() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut offloads = 0;
    let mut rng = substream(2, "acceptance-queueing");
    for instance in 0..1000u64 {
        let j = rng.random_range(1..=3usize);
        let mut s = Scenario::desk();
        s.constellation.satellite_count = j;
        s.constellation.angular_spacing_deg = rng.random_range(2.0..8.0);
        s.constellation.initial_offset_deg = rng.random_range(-8.0..8.0);
        s.compute.resize(j);
        s.compute.f_sat_hz = (0..j).map(|_| rng.random_range(4e9..2e10)).collect();
        s.compute.q_en = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(1.0..40.0) };
        s.link.beta0 = db_to_linear(rng.random_range(15.0..45.0));
        s.workload.tasks_per_period = rng.random_range(1..=6usize);
        let tasks = generate_period(&s.workload, &mut substream(instance, WORKLOAD));
        let sats = orbit::initial_states(&s.constellation);
        let t0 = rng.random_range(0.0..3000.0);
        let ctx = PeriodContext { scenario: &s, tasks: &tasks, satellites: &sats, t0 };
        let visible: Vec<usize> = (0..j).filter(|&k| ctx.is_visible(k)).collect();
        let assignment: Vec<Destination> = (0..tasks.len())
            .map(|_| match rng.random_range(0..=visible.len()) {
                0 => Destination::Local,
                k => Destination::Satellite(visible[k - 1]),
            })
            .collect();
        offloads += assignment.iter().filter(|d| **d != Destination::Local).count();
        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.shuffle(&mut rng);
        let decision = PeriodDecision { assignment, order };
        let mut q = QueueState::new(j);
        q.local_release = t0 + rng.random_range(-20.0..20.0);
        q.crypto_release = t0 + rng.random_range(-20.0..5.0);
        q.uplink_release = t0 + rng.random_range(-20.0..20.0);
        for r in &mut q.satellite_release {
            *r = t0 + rng.random_range(-20.0..20.0);
        }
        let gammas: Vec<f64> = sats.iter().map(|x| x.gamma_deg).collect();
        let want = simulate(
            &s,
            &tasks,
            &decision,
            &gammas,
            t0,
            &Releases { local: q.local_release, crypto: q.crypto_release, uplink: q.uplink_release, satellites: q.satellite_release.clone() },
        );
        let (got, next) =
            execute_period(&ctx, &decision, &q, &mut substream(instance, ADVERSARY), AttackMode::Expected).unwrap();
        for rec in &got.records {
            let o = &want.tasks[rec.task_id];
            worst = worst.max(rel(rec.start, o.start)).max(rel(rec.end, o.end)).max(rel(rec.energy, o.energy));
            worst = worst.max((rec.success_prob - o.success).abs());
        }
        worst = worst.max(rel(got.makespan, want.makespan)).max(rel(got.energy, want.energy));
        worst = worst.max((got.success_prob - want.success).abs());
        worst = worst.max(rel(next.uplink_release, want.releases.uplink));
        for k in 0..j {
            worst = worst.max(rel(next.satellite_release[k], want.releases.satellites[k]));
        }
    }
    verdict(worst <= QUEUE_TOL && offloads > 1000, format!("1000 instances, {offloads} offloads, max rel dev {worst:.2e} (tol {QUEUE_TOL:e})"))
}

// 3 ------------------------------------------------------------------------

fn adversary() -> Verdict {
    let low = Task::new(0, 1000, SecurityLevel::Low);
    let forced = AdversaryConfig { mean_malicious: 3.0, forced_count: Some(3) };
    let mut rng = substream(3, ADVERSARY);
    let hits = (0..100_000).filter(|_| sample_attack(&low, &mut rng, &forced)).count();
    let freq = hits as f64 / 1e5;

    let none = AdversaryConfig { mean_malicious: 0.0, forced_count: None };
    let mut zero_hits = 0;
    for level in [SecurityLevel::Low, SecurityLevel::Medium, SecurityLevel::High] {
        let t = Task::new(0, 1000, level);
        zero_hits += (0..100_000).filter(|_| sample_attack(&t, &mut rng, &none)).count();
    }
    let mut s = Scenario::desk();
    s.adversary.mean_malicious = 0.0;
    let mut env = OffloadEnv::new(s, 0).unwrap();
    let mut episode_attacks = 0.0;
    for seed in 0..50 {
        let mut p = satedge_core::baselines::make_baseline(BaselineKind::AllOffloading, 1, seed);
        episode_attacks += satedge_core::baselines::run_episode(&mut env, p.as_mut(), seed).unwrap().attacks;
    }
    verdict(
        (freq - 0.875).abs() <= ATTACK_TOL && zero_hits == 0 && episode_attacks == 0.0,
        format!("forced x=3: {freq:.4} (0.875 +/- {ATTACK_TOL}); mu=0: {zero_hits} draw hits, {episode_attacks} episode attacks"),
    )
}

// 4 ------------------------------------------------------------------------

fn all_local_invariance() -> Verdict {
    let mut c = ExperimentConfig::default();
    c.policies = vec![PolicySpec::Baseline(BaselineKind::AllLocal)];
    c.sweep_axis = SweepAxis::Mu;
    c.sweep_values = vec![0.0, 3.0, 6.0, 9.0, 12.0];
    c.seeds = vec![0, 1, 2];
    c.episodes = 2;
    let out = run(&c, &RunOptions { dry: true, ..Default::default() }).unwrap();
    let means: Vec<u64> = out.summary.iter().map(|s| s.mean_cost.to_bits()).collect();
    let per_value: Vec<Vec<u64>> = c
        .sweep_values
        .iter()
        .map(|v| out.rows.iter().filter(|r| r.sweep_value == Some(*v)).map(|r| r.cost.to_bits()).collect())
        .collect();
    let same = means.iter().all(|&m| m == means[0]) && per_value.iter().all(|v| *v == per_value[0]);
    verdict(same, format!("summary cost {:.6} over mu in {{0,3,6,9,12}}, bit-identical: {same}", f64::from_bits(means[0])))
}

// 5 ------------------------------------------------------------------------

const OBS: usize = 6;
const ACTIONS: usize = 5;

fn ppo_math() -> Verdict {
    // Hand batch: ratios 1, 2, 0.5, 0.5 with advantages 0.7, 1, -1, 1 and
    // eps = 0.2 give surrogates 0.7, 1.2, -0.8, 0.5.
    let new = [0.0, 2f64.ln(), 0.5f64.ln(), 0.5f64.ln()];
    let clip = clipped_policy_loss(&new, &[0.0; 4], &[0.7, 1.0, -1.0, 1.0], 0.2);
    let vf = value_loss(&[1.0, 2.0, 0.0, -1.0], &[3.0, 2.0, 1.0, 1.0]);
    let total = total_loss(clip, vf, 4f64.ln(), 0.5, 0.01);
    let mut exact = (clip - 0.4).abs() < 1e-15 && vf == 2.25 && total == clip - 0.5 * 2.25 + 0.01 * 4f64.ln();

    // Zero network: uniform policy over open actions, V = 0.
    let policy = Mlp::zeros(&[2, 4]);
    let value = Mlp::zeros(&[2, 1]);
    let obs = [0.5, -0.5];
    let masks = [vec![true; 4], vec![true, true, false, false]];
    let samples = [
        Sample { obs: &obs, mask: &masks[0], action: 2, old_log_prob: 0.25f64.ln(), advantage: 1.5, ret: 2.0 },
        Sample { obs: &obs, mask: &masks[1], action: 1, old_log_prob: 0.25f64.ln(), advantage: -1.0, ret: -1.0 },
    ];
    let cfg = PpoConfig::default();
    let s = objective(&policy, &value, &samples, &cfg, None).unwrap();
    exact &= s.policy == -0.25
        && s.value == 2.5
        && (s.entropy - (4f64.ln() + 2f64.ln()) / 2.0).abs() < 1e-15
        && s.total == total_loss(s.policy, s.value, s.entropy, 0.5, 0.01);

    // Analytic gradient of the total objective against central differences.
    let cfg = PpoConfig { hidden: vec![16, 16], ..PpoConfig::default() };
    let mut worst: f64 = 0.0;
    for draw in 0..20u64 {
        let mut rng = substream(draw, "acceptance-fd");
        let policy = Mlp::new(&[OBS, 16, 16, ACTIONS], 1.0, &mut rng);
        let value = Mlp::new(&[OBS, 16, 16, 1], 1.0, &mut rng);
        let mut obs = Vec::new();
        let mut masks = Vec::new();
        let mut rows = Vec::new();
        for i in 0..10 {
            let o: Vec<f64> = (0..OBS).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m: Vec<bool> = (0..ACTIONS).map(|k| k == 0 || rng.random_bool(0.7)).collect();
            let lp = dist::masked_log_softmax(&policy.forward(&o), &m).unwrap();
            let open: Vec<usize> = (0..ACTIONS).filter(|&k| m[k]).collect();
            let a = open[rng.random_range(0..open.len())];
            // Ratios kept away from the clip kinks at 0.8 and 1.2.
            let ratio = [0.65, 0.95, 1.05, 1.4][i % 4] + rng.random_range(-0.04..0.04);
            rows.push((a, lp[a] - f64::ln(ratio), rng.random_range(-2.0..2.0), rng.random_range(-3.0..3.0)));
            obs.push(o);
            masks.push(m);
        }
        let batch: Vec<Sample> = rows
            .iter()
            .enumerate()
            .map(|(i, &(action, old_log_prob, advantage, ret))| Sample { obs: &obs[i], mask: &masks[i], action, old_log_prob, advantage, ret })
            .collect();
        let mut gp = vec![0.0; policy.params.len()];
        let mut gv = vec![0.0; value.params.len()];
        objective(&policy, &value, &batch, &cfg, Some((&mut gp, &mut gv))).unwrap();
        let f = |p: &Mlp, v: &Mlp| objective(p, v, &batch, &cfg, None).unwrap().total;
        let h = 1e-5;
        let err = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
        for k in 0..policy.params.len() {
            let mut p = policy.clone();
            p.params[k] += h;
            let up = f(&p, &value);
            p.params[k] -= 2.0 * h;
            worst = worst.max(err(gp[k], (up - f(&p, &value)) / (2.0 * h)));
        }
        for k in 0..value.params.len() {
            let mut v = value.clone();
            v.params[k] += h;
            let up = f(&policy, &v);
            v.params[k] -= 2.0 * h;
            worst = worst.max(err(gv[k], (up - f(&policy, &v)) / (2.0 * h)));
        }
    }
    verdict(exact && worst <= FD_TOL, format!("hand batches exact: {exact}; FD max rel err {worst:.2e} over 20 draws (tol {FD_TOL:e})"))
}

// 6 ------------------------------------------------------------------------

fn gae_check() -> Verdict {
    let mut rng = substream(6, "acceptance-gae");
    let mut worst: f64 = 0.0;
    let mut special = true;
    for _ in 0..100 {
        let r: Vec<f64> = (0..50).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v: Vec<f64> = (0..50).map(|_| rng.random_range(-5.0..5.0)).collect();
        let d: Vec<bool> = (0..50).map(|_| rng.random_bool(0.1)).collect();
        let last = rng.random_range(-5.0..5.0);
        let (g, l) = (rng.random_range(0.5..1.0), rng.random_range(0.0..1.0));
        let delta = |t: usize, gamma: f64| {
            let next = if t + 1 < 50 { v[t + 1] } else { last };
            r[t] + gamma * next * if d[t] { 0.0 } else { 1.0 } - v[t]
        };
        let (adv, ret) = gae(&r, &v, &d, last, g, l);
        for t in 0..50 {
            let mut acc = 0.0;
            for k in t..50 {
                acc += (g * l).powi((k - t) as i32) * delta(k, g);
                if d[k] {
                    break;
                }
            }
            worst = worst.max((adv[t] - acc).abs());
            special &= ret[t] == adv[t] + v[t];
        }
        // lambda = 0: one-step TD error, exactly.
        let (adv0, _) = gae(&r, &v, &d, last, g, 0.0);
        special &= (0..50).all(|t| adv0[t] == delta(t, g));
        // gamma = lambda = 1 on one episode: Monte Carlo return minus value.
        let mut one = vec![false; 50];
        one[49] = true;
        let (adv1, _) = gae(&r, &v, &one, 0.0, 1.0, 1.0);
        for t in 0..50 {
            let mc: f64 = r[t..].iter().sum();
            worst = worst.max((adv1[t] - (mc - v[t])).abs());
        }
    }
    verdict(worst <= GAE_TOL && special, format!("100 x 50 steps, max abs err {worst:.2e} (tol {GAE_TOL:e}); special cases: {special}"))
}

// 7 ------------------------------------------------------------------------

fn constraint_soundness() -> Verdict {
    let scenario = Scenario::constraint_stress();
    let rho = scenario.env.rho;
    let mut env = OffloadEnv::new(scenario, 0).unwrap();
    let (mut periods, mut offloads, mut violations) = (0u64, 0u64, 0u64);
    for seed in 0..10_000u64 {
        let mut rng = substream(seed, "acceptance-random-walk");
        env.reset(seed);
        let mut visible: Vec<bool> = Vec::new();
        while !env.is_done() {
            if env.decided_count() == 0 {
                let ctx = env.context();
                visible = (0..env.satellites().len()).map(|j| ctx.is_visible(j)).collect();
            }
            let a = env.sample_open_action(&mut rng).unwrap();
            if let Some(o) = env.step(a).unwrap().outcome {
                periods += 1;
                if o.success_prob < rho {
                    violations += 1;
                }
                for r in &o.records {
                    if let Destination::Satellite(j) = r.destination {
                        offloads += 1;
                        if !visible[j] {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    verdict(violations == 0 && offloads > 0, format!("{periods} periods, {offloads} offloads, {violations} violations"))
}

// 8 ------------------------------------------------------------------------

fn desk_learning() -> Verdict {
    let mut c = desk_config("desk-learning");
    c.policies = vec![
        PolicySpec::Ppo,
        PolicySpec::Baseline(BaselineKind::Greedy),
        PolicySpec::Baseline(BaselineKind::RoundRobin),
        PolicySpec::Baseline(BaselineKind::AllLocal),
        PolicySpec::Baseline(BaselineKind::AllOffloading),
    ];
    c.greedy_samples = 100;
    c.seeds = vec![0];
    c.episodes = 100;
    let start = Instant::now();
    let out = run(&c, &RunOptions { dry: true, ..Default::default() }).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let reward = |p: &str| out.summary.iter().find(|s| s.policy == p).unwrap().mean_reward;
    let ppo = reward("ppo");
    let others = ["greedy", "round_robin", "all_local", "all_offloading"];
    let beaten = others.iter().all(|p| ppo >= reward(p));
    let listing: Vec<String> = others.iter().map(|p| format!("{p} {:.3}", reward(p))).collect();
    verdict(
        beaten && secs <= 600.0,
        format!("ppo {ppo:.3} vs {}; {:.0} s (limit 600 s)", listing.join(", "), secs),
    )
}

// 9 ------------------------------------------------------------------------

/// Costs per sweep value (in sweep order) for one policy, ordered by seed.
fn series(rows: &[EpisodeRow], values: &[f64], policy: &str) -> Vec<Vec<f64>> {
    values
        .iter()
        .map(|v| {
            let mut r: Vec<&EpisodeRow> = rows.iter().filter(|r| r.sweep_value == Some(*v) && r.policy == policy).collect();
            r.sort_by_key(|r| (r.seed, r.episode));
            r.iter().map(|r| r.cost).collect()
        })
        .collect()
}

fn fmt_means(s: &[Vec<f64>]) -> String {
    s.iter().map(|x| format!("{:.2}", mean(x))).collect::<Vec<_>>().join(" ")
}

fn trends() -> Verdict {
    let seeds: Vec<u64> = (0..30).collect();
    let mut notes = Vec::new();

    let mut a = desk_config("trend-mu");
    a.policies = vec![PolicySpec::Baseline(BaselineKind::AllOffloading)];
    a.sweep_axis = SweepAxis::Mu;
    a.sweep_values = vec![0.0, 3.0, 6.0, 9.0, 12.0];
    a.seeds = seeds.clone();
    a.episodes = 1;
    let rows = run(&a, &RunOptions { dry: true, ..Default::default() }).unwrap().rows;
    let sa = series(&rows, &a.sweep_values, "all_offloading");
    let ok_a = nondecreasing(&sa);
    notes.push(format!("(a) {} [{}]", if ok_a { "ok" } else { "FAIL" }, fmt_means(&sa)));

    let mut b = desk_config("trend-flocal");
    b.policies = vec![PolicySpec::Baseline(BaselineKind::AllLocal)];
    b.sweep_axis = SweepAxis::FLocal;
    b.sweep_values = vec![3.5e9, 4.0e9, 4.5e9, 5.0e9, 5.5e9, 6.0e9, 6.5e9];
    b.seeds = seeds.clone();
    b.episodes = 1;
    let rows = run(&b, &RunOptions { dry: true, ..Default::default() }).unwrap().rows;
    let sb = series(&rows, &b.sweep_values, "all_local");
    let ok_b = strictly_decreasing(&sb);
    notes.push(format!("(b) {} [{}]", if ok_b { "ok" } else { "FAIL" }, fmt_means(&sb)));

    let mut c = desk_config("trend-lambda");
    c.policies = vec![
        PolicySpec::Ppo,
        PolicySpec::Baseline(BaselineKind::Greedy),
        PolicySpec::Baseline(BaselineKind::RoundRobin),
        PolicySpec::Baseline(BaselineKind::AllLocal),
        PolicySpec::Baseline(BaselineKind::AllOffloading),
    ];
    c.greedy_samples = 100;
    c.sweep_axis = SweepAxis::TaskSize;
    c.sweep_values = vec![8e7, 1.2e8, 1.6e8, 2.0e8, 2.4e8];
    c.seeds = seeds;
    c.episodes = 1;
    let rows = run(&c, &RunOptions { dry: true, shared_training_seed: Some(0), ..Default::default() }).unwrap().rows;
    let mut ok_c = true;
    for p in &c.policies {
        let sc = series(&rows, &c.sweep_values, p.name());
        let ok = nondecreasing(&sc);
        ok_c &= ok;
        notes.push(format!("(c) {} {} [{}]", p.name(), if ok { "ok" } else { "FAIL" }, fmt_means(&sc)));
    }
    verdict(ok_a && ok_b && ok_c, format!("30 seeds, sign test 95%\n       {}", notes.join("\n       ")))
}

// 10 -----------------------------------------------------------------------

fn convergence() -> Verdict {
    let start = Instant::now();
    let mut c = desk_config("convergence-interval");
    c.sweep_axis = SweepAxis::UpdateInterval;
    c.sweep_values = vec![5.0, 50.0, 500.0, 1000.0];
    c.seeds = vec![0];
    let by_interval = run_training(&c).unwrap();

    let mut l = desk_config("convergence-lr");
    l.ppo.update_interval = 5;
    l.sweep_axis = SweepAxis::LearningRate;
    l.sweep_values = vec![1e-4, 3e-4, 1e-3, 1e-2];
    l.seeds = vec![0];
    let by_lr = run_training(&l).unwrap();
    let secs = start.elapsed().as_secs_f64();

    let fin = |recs: &[satedge_harness::experiment::TrainRecord], v: f64| {
        recs.iter().find(|r| r.sweep_value == Some(v)).map(|r| r.final_reward).unwrap()
    };
    let curves_written = by_interval.iter().chain(&by_lr).all(|r| {
        let dir = r.checkpoint.parent().unwrap();
        let tag = r.checkpoint.file_stem().unwrap().to_string_lossy().trim_start_matches("ppo_").to_string();
        dir.join(format!("curve_{tag}.csv")).exists()
    });
    let (i5, i1000) = (fin(&by_interval, 5.0), fin(&by_interval, 1000.0));
    let intervals: Vec<String> = c.sweep_values.iter().map(|&v| format!("{v}: {:.2}", fin(&by_interval, v))).collect();
    let lrs: Vec<String> = l.sweep_values.iter().map(|&v| format!("{v:e}: {:.2}", fin(&by_lr, v))).collect();
    verdict(
        i5 >= i1000 && curves_written && secs <= 3600.0,
        format!(
            "final reward by interval [{}], by lr [{}]; curves in {}; {:.0} s (limit 3600 s)",
            intervals.join(", "),
            lrs.join(", "),
            out_dir("").display(),
            secs
        ),
    )
}

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(u32, &str, Option<f64>, fn() -> Verdict); 10] = [
        (1, "formula oracles", Some(1.0), formulas),
        (2, "queueing equivalence", Some(10.0), queueing),
        (3, "adversary statistics", Some(5.0), adversary),
        (4, "all-local invariance in mu", None, all_local_invariance),
        (5, "ppo losses and gradients", None, ppo_math),
        (6, "gae", None, gae_check),
        (7, "constraint soundness", None, constraint_soundness),
        (8, "desk-scale learning", None, desk_learning),
        (9, "trend reproduction", None, trends),
        (10, "convergence sweep", None, convergence),
    ];
    let mut hard_failures = 0;
    for (id, name, budget, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs <= b);
        let pass = v.pass && in_time;
        let timing = match budget {
            Some(b) => format!("{secs:.2} s, limit {b} s"),
            None => format!("{secs:.1} s"),
        };
        let known = !pass && KNOWN_RED.contains(&id);
        println!(
            "[{}] {id:>2} {name}: {} ({timing}){}",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            if known { " [known red]" } else { "" }
        );
        if !pass && !known {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
