use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PPOConfig {
    pub clip_epsilon: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs_per_iter: usize,
    pub minibatch_size: usize,
    /// Environment steps per task per iteration.
    pub batch_size: usize,
}

impl Default for PPOConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs_per_iter: 10,
            minibatch_size: 64,
            batch_size: 2000,
        }
    }
}

impl PPOConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("ppo: {m}")));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon.is_finite()) {
            return fail("clip_epsilon must be positive");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return fail("discount must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail("gae_lambda must lie in [0, 1]");
        }
        if self.epochs_per_iter == 0 || self.minibatch_size == 0 {
            return fail("epochs_per_iter and minibatch_size must be positive");
        }
        if self.batch_size < self.minibatch_size {
            return fail("batch_size must be at least minibatch_size");
        }
        Ok(())
    }
}
