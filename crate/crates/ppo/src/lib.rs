//! Proximal policy optimization with invalid-action masking.
//!
//! Small dense networks with hand-written backpropagation ([`nn`]), Adam
//! ([`adam`]), masked categorical distributions ([`dist`]), the PPO loss
//! terms and GAE ([`loss`]), the rollout/update loop ([`agent`]) and JSON
//! checkpoints ([`checkpoint`]).

pub mod adam;
pub mod agent;
pub mod checkpoint;
pub mod dist;
pub mod error;
pub mod loss;
pub mod nn;

pub use agent::{train, CurvePoint, Environment, IntervalUnit, PpoAgent, PpoConfig, TrainOutput};
pub use error::{Error, Result};
