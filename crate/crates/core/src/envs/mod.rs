//! Surrogate continuous-control tasks.
//!
//! Two families of two-state systems stand in for articulated robots:
//! a vertical spring-leg hopper whose mass and stiffness vary between tasks,
//! and a damped point walker rewarded for moving forward or backward while
//! observing only its velocity.

mod hopper;
mod walker;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hopper::HopperParams;
pub use walker::{Direction, WalkerParams};

/// One task: dynamics, reward, horizon and initial-state distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TaskSpec {
    ParamHopper(HopperParams),
    DirectionalWalker(WalkerParams),
}

/// Position/velocity pair shared by both families: (z, vz) for the hopper,
/// (x, v) for the walker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub position: f64,
    pub velocity: f64,
    pub steps: usize,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: EnvState,
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Failure; no value bootstrap past this step.
    pub terminated: bool,
    /// Horizon reached.
    pub truncated: bool,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

impl TaskSpec {
    pub fn name(&self) -> &str {
        match self {
            TaskSpec::ParamHopper(p) => &p.name,
            TaskSpec::DirectionalWalker(p) => &p.name,
        }
    }

    /// Random stream id for this task, if pinned in the config.
    pub fn stream(&self) -> Option<u64> {
        match self {
            TaskSpec::ParamHopper(p) => p.stream,
            TaskSpec::DirectionalWalker(p) => p.stream,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            TaskSpec::ParamHopper(_) => "param_hopper",
            TaskSpec::DirectionalWalker(_) => "directional_walker",
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            TaskSpec::ParamHopper(_) => 2,
            TaskSpec::DirectionalWalker(_) => 1,
        }
    }

    pub fn act_dim(&self) -> usize {
        1
    }

    pub fn max_steps(&self) -> usize {
        match self {
            TaskSpec::ParamHopper(p) => p.max_steps,
            TaskSpec::DirectionalWalker(p) => p.max_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TaskSpec::ParamHopper(p) => p.validate(),
            TaskSpec::DirectionalWalker(p) => p.validate(),
        }
    }

    pub fn observe(&self, state: &EnvState) -> Vec<f64> {
        match self {
            TaskSpec::ParamHopper(_) => vec![state.position, state.velocity],
            TaskSpec::DirectionalWalker(_) => vec![state.velocity],
        }
    }
}

pub(crate) fn check_range(what: &str, range: [f64; 2]) -> Result<()> {
    if !(range[0].is_finite() && range[1].is_finite() && range[0] <= range[1]) {
        return Err(Error::Config(format!("{what}: bad range {range:?}")));
    }
    Ok(())
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..=range[1])
    }
}

pub fn env_reset<R: Rng + ?Sized>(spec: &TaskSpec, rng: &mut R) -> (EnvState, Vec<f64>) {
    let state = match spec {
        TaskSpec::ParamHopper(p) => p.reset(rng),
        TaskSpec::DirectionalWalker(p) => p.reset(rng),
    };
    let obs = spec.observe(&state);
    (state, obs)
}

pub fn env_step(spec: &TaskSpec, state: &EnvState, action: &[f64]) -> Result<Transition> {
    if state.finished {
        return Err(Error::Terminated);
    }
    crate::error::check_len("action", spec.act_dim(), action.len())?;
    let a = action[0];
    if a.is_nan() {
        return Err(Error::NonFinite("action"));
    }
    let a = a.clamp(-1.0, 1.0);
    let (position, velocity, reward, terminated) = match spec {
        TaskSpec::ParamHopper(p) => p.step(state.position, state.velocity, a),
        TaskSpec::DirectionalWalker(p) => p.step(state.position, state.velocity, a),
    };
    let steps = state.steps + 1;
    let truncated = !terminated && steps >= spec.max_steps();
    let next = EnvState {
        position,
        velocity,
        steps,
        finished: terminated || truncated,
    };
    let observation = spec.observe(&next);
    if !(reward.is_finite() && observation.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("environment transition"));
    }
    Ok(Transition {
        state: next,
        observation,
        reward,
        terminated,
        truncated,
    })
}

/// Built-in task suites.
pub fn suite(name: &str) -> Option<Vec<TaskSpec>> {
    let hopper = |name: &str, mass: f64, spring_k: f64| {
        TaskSpec::ParamHopper(HopperParams {
            name: name.to_string(),
            mass,
            spring_k,
            ..HopperParams::default()
        })
    };
    let pair = |light: f64| {
        vec![
            hopper(&format!("hopper_m{light}"), light, 200.0),
            hopper("hopper_m15", 15.0, 200.0),
        ]
    };
    let walker = |direction: Direction| {
        TaskSpec::DirectionalWalker(WalkerParams {
            name: format!("walker_{direction}"),
            direction,
            ..WalkerParams::default()
        })
    };
    Some(match name {
        "hopper_shapes" => vec![
            hopper("hopper_m5_k150", 5.0, 150.0),
            hopper("hopper_m10_k200", 10.0, 200.0),
            hopper("hopper_m15_k250", 15.0, 250.0),
        ],
        "hopper_mass_3_15" => pair(3.0),
        "hopper_mass_8_15" => pair(8.0),
        "hopper_mass_14_15" => pair(14.0),
        "walker_fwd_bwd" => vec![walker(Direction::Forward), walker(Direction::Backward)],
        _ => return None,
    })
}

pub const SUITE_NAMES: &[&str] = &[
    "hopper_shapes",
    "hopper_mass_3_15",
    "hopper_mass_8_15",
    "hopper_mass_14_15",
    "walker_fwd_bwd",
];
