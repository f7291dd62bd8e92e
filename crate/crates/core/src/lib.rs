//! Multi-task policy learning with gradient-guided specialization.
//!
//! Training runs in two phases. A single Gaussian MLP policy is first trained
//! with PPO on rollouts pooled from every task. The policy is then split: per
//! task PPO gradients are compared weight by weight, the weights on which the
//! tasks agree (lowest cross-task gradient variance) stay shared and the rest
//! are copied once per task and trained on that task's data only.
//!
//! Module map:
//! - [`nn`]: parameter layout, MLP forward/backward, Gaussian policy head, Adam.
//! - [`split`]: gradient matrix, variance metric, share masks, split policy.
//! - [`ppo`]: rollouts, GAE, clipped surrogate, policy and value updates.
//! - [`envs`]: surrogate hopper and directional walker dynamics.
//! - [`harness`]: experiment schedule, baselines, CSV output and aggregation.

pub mod envs;
pub mod error;
pub mod harness;
pub mod nn;
pub mod ppo;
pub mod rng;
pub mod split;

pub use error::{Error, Result};
