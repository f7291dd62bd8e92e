use crate::error::{check_finite, check_len, Error, Result};

use super::shifted_mean;

/// Number of PPO iterations the specialization metric is averaged over.
pub const METRIC_WINDOW: usize = 10;

/// One PPO-loss gradient row per task, all over the same parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    rows: Vec<Vec<f64>>,
}

impl GradientMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("gradient matrix needs at least one row"));
        };
        let width = first.len();
        for row in &rows {
            check_len("gradient row", width, row.len())?;
            check_finite("gradient row", row)?;
        }
        Ok(Self { rows })
    }

    pub fn task_count(&self) -> usize {
        self.rows.len()
    }

    pub fn num_params(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, task: usize) -> &[f64] {
        &self.rows[task]
    }

    /// Element-wise mean over tasks.
    pub fn mean_row(&self) -> Vec<f64> {
        shifted_mean(&self.rows)
    }
}

/// Per-parameter variance of the task gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceVector(Vec<f64>);

impl VarianceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite("variance vector", &values)?;
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("variance entries must be non-negative"));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Population variance across tasks for every coordinate.
///
/// Values are shifted by the first task's row before the two-pass
/// computation, so coordinates where every task agrees come out exactly 0.
pub fn specialization_metric(grads: &GradientMatrix) -> Result<VarianceVector> {
    let n = grads.task_count();
    if n < 2 {
        return Err(Error::invalid(format!(
            "variance metric needs at least 2 tasks, got {n}"
        )));
    }
    let first = grads.row(0);
    let nf = n as f64;
    let values = (0..grads.num_params())
        .map(|j| {
            let mean = grads.rows().iter().map(|r| r[j] - first[j]).sum::<f64>() / nf;
            grads
                .rows()
                .iter()
                .map(|r| {
                    let d = (r[j] - first[j]) - mean;
                    d * d
                })
                .sum::<f64>()
                / nf
        })
        .collect();
    Ok(VarianceVector(values))
}

/// Fixed-capacity window of variance vectors with their element-wise mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAccumulator {
    capacity: usize,
    window: Vec<VarianceVector>,
    averaged: Option<VarianceVector>,
}

impl Default for MetricAccumulator {
    fn default() -> Self {
        Self::new(METRIC_WINDOW)
    }
}

impl MetricAccumulator {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "metric window must be positive");
        Self {
            capacity,
            window: Vec::with_capacity(capacity),
            averaged: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.window.len() == self.capacity
    }

    pub fn push(&mut self, v: VarianceVector) -> Result<()> {
        if self.is_full() {
            return Err(Error::invalid(format!(
                "metric window already holds {} vectors",
                self.capacity
            )));
        }
        if let Some(first) = self.window.first() {
            check_len("variance vector", first.len(), v.len())?;
        }
        self.window.push(v);
        if self.is_full() {
            let rows: Vec<&[f64]> = self.window.iter().map(|v| v.as_slice()).collect();
            // shifted mean of non-negative values can round below zero
            let mean = shifted_mean(&rows)
                .into_iter()
                .map(|x| x.max(0.0))
                .collect();
            self.averaged = Some(VarianceVector(mean));
        }
        Ok(())
    }

    /// Element-wise mean of the window; `None` until it is full.
    pub fn averaged(&self) -> Option<&VarianceVector> {
        self.averaged.as_ref()
    }

    pub fn window(&self) -> &[VarianceVector] {
        &self.window
    }
}
