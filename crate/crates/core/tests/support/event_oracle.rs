//! Brute-force event-list simulator used as an oracle for period execution.
//!
//! Shares nothing with the crate's queue arithmetic: every resource is an
//! explicit server with a waiting list, and time advances by popping the
//! next event. Geometry uses the plain law of cosines and BER uses libm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use satedge_core::sim::{Destination, PeriodDecision};
use satedge_core::workload::Task;
use satedge_core::Scenario;

#[derive(Debug, Clone)]
pub struct Releases {
    pub local: f64,
    pub crypto: f64,
    pub uplink: f64,
    pub satellites: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct OracleTask {
    pub start: f64,
    pub end: f64,
    pub energy: f64,
    pub success: f64,
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// Indexed by task id.
    pub tasks: Vec<OracleTask>,
    pub makespan: f64,
    pub energy: f64,
    pub success: f64,
    pub releases: Releases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Res {
    Local,
    Crypto,
    Uplink,
    Sat(usize),
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    Arrive { job: usize, stage: usize },
    Finish { job: usize, stage: usize },
    Free,
}

struct Event {
    time: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    fn cmp(&self, o: &Self) -> Ordering {
        o.time.total_cmp(&self.time).then(o.seq.cmp(&self.seq))
    }
}

struct Server {
    res: Res,
    busy_until: f64,
    waiting: Vec<usize>,
}

fn gamma_at(g0: f64, v: f64, dt: f64) -> f64 {
    let mut g = g0 - v * dt;
    while g > 180.0 {
        g -= 360.0;
    }
    while g <= -180.0 {
        g += 360.0;
    }
    g
}

fn range_km(gamma_deg: f64, r: f64, h: f64) -> f64 {
    (r * r + (r + h) * (r + h) - 2.0 * r * (r + h) * gamma_deg.to_radians().cos()).sqrt()
}

/// Runs one period. `gammas` are satellite angles at `t0`.
pub fn simulate(
    s: &Scenario,
    tasks: &[Task],
    decision: &PeriodDecision,
    gammas: &[f64],
    t0: f64,
    init: &Releases,
) -> OracleOutcome {
    let c = &s.compute;
    let l = &s.link;
    let k = &s.constellation;
    let n = tasks.len();
    let mut pos = vec![0; n];
    for (p, &i) in decision.order.iter().enumerate() {
        pos[i] = p;
    }
    let stages: Vec<Vec<Res>> = (0..n)
        .map(|i| match decision.assignment[i] {
            Destination::Local => vec![Res::Local],
            Destination::Satellite(j) => vec![Res::Crypto, Res::Uplink, Res::Sat(j)],
        })
        .collect();

    let mut servers = vec![
        Server { res: Res::Local, busy_until: init.local, waiting: vec![] },
        Server { res: Res::Crypto, busy_until: init.crypto, waiting: vec![] },
        Server { res: Res::Uplink, busy_until: init.uplink, waiting: vec![] },
    ];
    for (j, &r) in init.satellites.iter().enumerate() {
        servers.push(Server { res: Res::Sat(j), busy_until: r, waiting: vec![] });
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Event>, time: f64, ev: Ev| {
        seq += 1;
        heap.push(Event { time, seq, ev });
    };
    for s in &servers {
        if s.busy_until > t0 {
            push(&mut heap, s.busy_until, Ev::Free);
        }
    }
    for i in 0..n {
        push(&mut heap, t0, Ev::Arrive { job: i, stage: 0 });
    }

    let mut out = vec![OracleTask { success: 1.0, ..Default::default() }; n];
    let mut final_release = init.clone();
    let mut now;
    while let Some(first) = heap.pop() {
        now = first.time;
        let mut batch = vec![first];
        while heap.peek().is_some_and(|e| e.time == now) {
            batch.push(heap.pop().unwrap());
        }
        for e in batch {
            match e.ev {
                Ev::Arrive { job, stage } => {
                    let res = stages[job][stage];
                    servers.iter_mut().find(|s| s.res == res).unwrap().waiting.push(job);
                }
                Ev::Finish { job, stage } => {
                    if stage + 1 < stages[job].len() {
                        push(&mut heap, now, Ev::Arrive { job, stage: stage + 1 });
                    } else {
                        out[job].end = now;
                    }
                }
                Ev::Free => {}
            }
        }
        // Start work on every idle server, lowest offload position first.
        for si in 0..servers.len() {
            if servers[si].busy_until > now || servers[si].waiting.is_empty() {
                continue;
            }
            let (w, &job) = servers[si].waiting.iter().enumerate().min_by_key(|(_, &j)| pos[j]).unwrap();
            servers[si].waiting.remove(w);
            let bits = tasks[job].data_bits as f64;
            let res = servers[si].res;
            let stage = stages[job].iter().position(|&r| r == res).unwrap();
            let duration = match res {
                Res::Local => {
                    out[job].start = now;
                    let t = bits * c.q_local / c.f_local_hz;
                    out[job].energy = c.k_hw * c.f_local_hz.powi(3) * t;
                    t
                }
                Res::Crypto => {
                    out[job].start = now;
                    let t = bits * c.q_en / c.f_en_hz;
                    out[job].energy += c.k_hw * c.f_en_hz.powi(3) * t;
                    t
                }
                Res::Uplink => {
                    let Destination::Satellite(j) = decision.assignment[job] else { unreachable!() };
                    let g = gamma_at(gammas[j], k.angular_velocity_deg_s, now - t0);
                    let d = range_km(g, k.earth_radius_km, k.orbit_altitude_km);
                    let snr = l.tx_power_w * l.beta0 / (d * d) / l.noise_power_w;
                    let rate = l.bandwidth_hz * (1.0 + snr).log2();
                    let ber = 0.5 * libm::erfc(snr.sqrt());
                    out[job].success = (bits * (-ber).ln_1p()).exp();
                    let t = bits / rate;
                    out[job].energy += l.tx_power_w * t;
                    t
                }
                Res::Sat(j) => bits * c.q_sat[j] / c.f_sat_hz[j],
            };
            let end = now + duration;
            servers[si].busy_until = end;
            match res {
                Res::Local => final_release.local = end,
                Res::Crypto => final_release.crypto = end,
                Res::Uplink => final_release.uplink = end,
                Res::Sat(j) => final_release.satellites[j] = end,
            }
            push(&mut heap, end, Ev::Finish { job, stage });
            push(&mut heap, end, Ev::Free);
        }
    }

    let makespan = out.iter().map(|t| t.end).fold(t0, f64::max) - t0;
    OracleOutcome {
        makespan,
        energy: out.iter().map(|t| t.energy).sum(),
        success: out.iter().map(|t| t.success).product(),
        tasks: out,
        releases: final_release,
    }
}
