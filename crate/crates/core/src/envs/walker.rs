use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_range, uniform, EnvState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Damped point mass on a line. Only the velocity is observed, so the
/// forward and backward tasks see identical observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkerParams {
    pub name: String,
    pub direction: Direction,
    pub dt: f64,
    pub damping: f64,
    pub force_scale: f64,
    pub max_steps: usize,
    pub ctrl_cost: f64,
    pub init_v: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
}

impl Default for WalkerParams {
    fn default() -> Self {
        Self {
            name: "walker".to_string(),
            direction: Direction::Forward,
            dt: 0.05,
            damping: 0.5,
            force_scale: 1.0,
            max_steps: 200,
            ctrl_cost: 0.001,
            init_v: [-0.05, 0.05],
            stream: None,
        }
    }
}

impl WalkerParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) || !self.damping.is_finite() {
            return Err(Error::Config(format!("{}: bad dt/damping", self.name)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config(format!(
                "{}: max_steps must be positive",
                self.name
            )));
        }
        check_range("init_v", self.init_v)
    }

    pub(crate) fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        EnvState {
            position: 0.0,
            velocity: uniform(rng, self.init_v),
            steps: 0,
            finished: false,
        }
    }

    pub(crate) fn step(&self, x: f64, v: f64, action: f64) -> (f64, f64, f64, bool) {
        let v = v + (action * self.force_scale - self.damping * v) * self.dt;
        let x = x + v * self.dt;
        let progress = match self.direction {
            Direction::Forward => v,
            Direction::Backward => -v,
        };
        (x, v, progress - self.ctrl_cost * action * action, false)
    }
}
