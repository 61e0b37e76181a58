//! Simulation core for offloading security-sensitive tasks from a single
//! ground user to a ring of LEO edge satellites.
//!
//! The crate is organised bottom-up:
//!
//! * [`orbit`] – constellation geometry (Earth-center angles, visibility, slant range)
//! * [`link`] – Ka-band channel chain (gain, SNR, Shannon rate, BPSK BER, reliability)
//! * [`workload`] – per-period task generation
//! * [`adversary`] – block-cipher break probability and Monte Carlo attack sampling
//! * [`sim`] – deterministic period execution over FCFS resources
//! * [`env`] – MDP wrapper with micro-step actions and feasibility masking
//! * [`baselines`] – static schedulers driven through the same environment contract
//!
//! All physical constants live in [`config::Scenario`].

pub mod adversary;
pub mod baselines;
pub mod config;
pub mod env;
pub mod error;
pub mod link;
pub mod orbit;
pub mod rng;
pub mod sim;
pub mod workload;

pub use config::Scenario;
pub use error::{Error, Result};
