//! Step-count JITAI simulation with a hidden "cannot walk" state, a
//! Gaussian-linear Thompson Sampling agent, and an LLM send/not-send filter
//! that can veto the agent's candidate message.
//!
//! Module map:
//!
//! - [`env`]: base behavioral dynamics (context, habituation, disengagement,
//!   step count).
//! - [`walk`]: two-state walk chain, text preferences, and the constraint
//!   applied while the user cannot walk.
//! - [`bandit`]: per-action Gaussian posteriors and Thompson Sampling.
//! - [`llm`]: prompt construction, response parsing, the mock oracle and the
//!   HTTP chat-completion client.
//! - [`agent`]: one trial of LLM+TS (or standard TS).
//! - [`harness`]: scenario sweeps, percentile aggregation, CSV and SVG output.

pub mod agent;
pub mod bandit;
pub mod env;
pub mod error;
pub mod harness;
pub mod llm;
pub mod rng;
pub mod walk;

pub use error::{Error, Result};
