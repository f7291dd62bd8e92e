//! PPO: rollouts, GAE, clipped surrogate, policy and value updates.

mod config;
mod gae;
mod loss;
mod rollout;
mod update;
mod value;

pub use config::PPOConfig;
pub use gae::{gae_advantages, gae_from_parts, normalize_advantages};
pub use loss::{ppo_loss, ppo_surrogate_terms, task_gradient};
pub use rollout::{collect_rollouts, GaussianPolicy, PolicyEvaluator, RolloutBatch};
pub use update::{for_each_minibatch, ppo_update, split_ppo_update, UpdateStats};
pub use value::{value_loss, value_update, ValueNet};

pub(crate) use loss::accumulate_ppo_gradient;
