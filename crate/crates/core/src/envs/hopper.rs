use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_range, uniform, EnvState};
use crate::error::{Error, Result};

/// Vertical spring-leg hopper.
///
/// In stance (z < rest_length) the leg spring and the thrust act on the body;
/// in flight only gravity does. Integrated with semi-implicit Euler, velocity
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopperParams {
    pub name: String,
    pub mass: f64,
    pub spring_k: f64,
    pub rest_length: f64,
    pub thrust_scale: f64,
    pub dt: f64,
    pub gravity: f64,
    pub max_steps: usize,
    pub alive_bonus: f64,
    pub ctrl_cost: f64,
    pub crash_height: f64,
    pub init_z: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
}

impl Default for HopperParams {
    fn default() -> Self {
        Self {
            name: "hopper".to_string(),
            mass: 10.0,
            spring_k: 200.0,
            rest_length: 1.0,
            thrust_scale: 40.0,
            dt: 0.01,
            gravity: 9.8,
            max_steps: 500,
            alive_bonus: 1.0,
            ctrl_cost: 0.001,
            crash_height: 0.2,
            init_z: [1.0, 1.05],
            stream: None,
        }
    }
}

impl HopperParams {
    pub(crate) fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("spring_k", self.spring_k),
            ("rest_length", self.rest_length),
            ("dt", self.dt),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{}: {what} must be positive",
                    self.name
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config(format!(
                "{}: max_steps must be positive",
                self.name
            )));
        }
        check_range("init_z", self.init_z)
    }

    pub(crate) fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        EnvState {
            position: uniform(rng, self.init_z),
            velocity: 0.0,
            steps: 0,
            finished: false,
        }
    }

    /// One integration step with an already-clipped action.
    pub fn integrate(&self, z: f64, vz: f64, action: f64) -> (f64, f64) {
        let acc = if z < self.rest_length {
            (self.spring_k * (self.rest_length - z) + action * self.thrust_scale) / self.mass
                - self.gravity
        } else {
            -self.gravity
        };
        let vz = vz + acc * self.dt;
        (z + vz * self.dt, vz)
    }

    pub(crate) fn step(&self, z: f64, vz: f64, action: f64) -> (f64, f64, f64, bool) {
        let (z, vz) = self.integrate(z, vz, action);
        let reward = (z - self.rest_length) + self.alive_bonus - self.ctrl_cost * action * action;
        (z, vz, reward, z <= self.crash_height)
    }

    /// Kinetic + gravitational + leg-spring energy.
    pub fn mechanical_energy(&self, z: f64, vz: f64) -> f64 {
        let compression = (self.rest_length - z).max(0.0);
        0.5 * self.mass * vz * vz
            + self.mass * self.gravity * z
            + 0.5 * self.spring_k * compression * compression
    }
}
