use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Result};

use super::ParamVector;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        Self {
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn len(&self) -> usize {
        self.first_moment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_moment.is_empty()
    }

    /// State restricted to `indices`, in that order. Hyperparameters and
    /// step count carry over.
    pub fn gather(&self, indices: &[usize]) -> Self {
        Self {
            first_moment: indices.iter().map(|&i| self.first_moment[i]).collect(),
            second_moment: indices.iter().map(|&i| self.second_moment[i]).collect(),
            ..self.clone()
        }
    }

    /// In-place update. Nothing is modified if validation fails.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        check_len("adam parameters", self.len(), params.len())?;
        check_len("adam gradient", self.len(), grad.len())?;
        check_finite("gradient", grad)?;
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Value-style Adam step: returns the new state and parameters.
pub fn adam_step(
    state: &AdamState,
    params: &ParamVector,
    grad: &[f64],
) -> Result<(AdamState, ParamVector)> {
    let mut next = state.clone();
    let mut p = params.clone();
    next.step(p.as_mut_slice(), grad)?;
    Ok((next, p))
}
