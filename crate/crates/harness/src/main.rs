use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::Value;

use satedge_harness::compare::rank;
use satedge_harness::config::{env_overrides, parse_value};
use satedge_harness::experiment::{read_results, run, run_training, RunOptions};
use satedge_harness::{load_config, Error, ExperimentConfig, Result};

/// Secure task offloading to LEO edge satellites: train, evaluate, sweep, compare.
#[derive(Parser)]
#[command(name = "satedge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train PPO for every seed (and sweep cell) and save checkpoints.
    Train(Common),
    /// Evaluate the configured policies on seeded episodes.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Evaluate PPO from this checkpoint instead of training it.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate the configured policies along a sweep axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// none | update_interval | learning_rate | task_size | f_local | mu
        #[arg(long)]
        sweep_axis: Option<String>,
        /// Comma-separated values in the axis' own units (Hz, bits, ...).
        #[arg(long, value_delimiter = ',')]
        sweep_values: Vec<f64>,
    },
    /// Rank policies from one or more results.csv files.
    Compare {
        #[arg(long, required = true, num_args = 1..)]
        results: Vec<PathBuf>,
        /// Also write the ranking as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults to the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Policies: ppo, greedy, round_robin, all_local, all_offloading, random.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    timesteps: Option<u64>,
    /// Any config key, e.g. --set rho=0.8 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, Value)>> {
        let mut o = env_overrides(std::env::vars());
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid("--set", format!("expected KEY=VALUE, got '{kv}'")))?;
            o.push((k.trim().to_string(), parse_value(v.trim())));
        }
        if !self.policy.is_empty() {
            o.push(("policies".into(), Value::Array(self.policy.iter().map(|p| Value::String(p.clone())).collect())));
        }
        if !self.seed.is_empty() {
            o.push(("seeds".into(), Value::Array(self.seed.iter().map(|&s| Value::Integer(s as i64)).collect())));
        }
        if let Some(out) = &self.out {
            o.push(("out_dir".into(), Value::String(out.display().to_string())));
        }
        if let Some(e) = self.episodes {
            o.push(("episodes".into(), Value::Integer(e as i64)));
        }
        if let Some(t) = self.timesteps {
            o.push(("total_timesteps".into(), Value::Integer(t as i64)));
        }
        Ok(o)
    }

    fn load(&self, extra: Vec<(String, Value)>) -> Result<ExperimentConfig> {
        let mut o = self.overrides()?;
        o.extend(extra);
        load_config(self.config.as_deref(), &o)
    }
}

fn print_summary(out: &satedge_harness::experiment::RunOutput) {
    println!("{:>14} {:>16} {:>8} {:>12} {:>10} {:>10} {:>10}", "sweep_value", "policy", "episodes", "mean_cost", "std_cost", "energy", "attacks");
    for s in &out.summary {
        let v = s.sweep_value.map_or("-".to_string(), |v| v.to_string());
        println!(
            "{v:>14} {:>16} {:>8} {:>12.4} {:>10.4} {:>10.4} {:>10.4}",
            s.policy, s.episodes, s.mean_cost, s.std_cost, s.mean_energy, s.mean_attacks
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(common) => {
            let cfg = common.load(Vec::new())?;
            for r in run_training(&cfg)? {
                let v = r.sweep_value.map_or("-".to_string(), |v| v.to_string());
                println!("{v:>14} seed {:>4} final reward {:>12.4}  {}", r.seed, r.final_reward, r.checkpoint.display());
            }
        }
        Command::Eval { common, checkpoint } => {
            let cfg = common.load(Vec::new())?;
            let out = run(&cfg, &RunOptions { checkpoint, ..Default::default() })?;
            print_summary(&out);
            println!("wrote {}", cfg.out_dir.join("results.csv").display());
        }
        Command::Sweep { common, sweep_axis, sweep_values } => {
            let mut extra = Vec::new();
            if let Some(a) = sweep_axis {
                extra.push(("sweep_axis".to_string(), Value::String(a)));
            }
            if !sweep_values.is_empty() {
                extra.push(("sweep_values".to_string(), Value::Array(sweep_values.into_iter().map(Value::Float).collect())));
            }
            let cfg = common.load(extra)?;
            if cfg.sweep_axis == satedge_harness::SweepAxis::None {
                return Err(Error::invalid("sweep_axis", "sweep needs an axis"));
            }
            let out = run(&cfg, &RunOptions::default())?;
            print_summary(&out);
            println!("wrote {}", cfg.out_dir.join("results.csv").display());
        }
        Command::Compare { results, out } => {
            let mut rows = Vec::new();
            for p in &results {
                if !p.exists() {
                    return Err(Error::ConfigNotFound(p.clone()));
                }
                rows.extend(read_results(p)?);
            }
            let ranking = rank(&rows)?;
            println!("{:>14} {:>5} {:>16} {:>8} {:>12} {:>10}", "sweep_value", "rank", "policy", "episodes", "mean_cost", "p_worse");
            for r in &ranking {
                let v = r.sweep_value.map_or("-".to_string(), |v| v.to_string());
                println!("{v:>14} {:>5} {:>16} {:>8} {:>12.4} {:>10.4}", r.rank, r.policy, r.episodes, r.mean_cost, r.p_worse_than_best);
            }
            if let Some(path) = out {
                let mut w = csv::Writer::from_path(path)?;
                for r in &ranking {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
