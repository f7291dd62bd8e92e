use crate::error::{check_len, Error, Result};
use crate::nn::{
    forward_into, AdamState, GaussianActionDistribution, ParamLayout, ParamVector, Workspace,
};

use super::{GradientMatrix, ShareMask};

/// N task subnetworks over one shared parameter store plus one specialized
/// store per task.
///
/// Task `i`'s network reads shared coordinates from the common store and
/// every other coordinate from its own copy.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPolicy {
    layout: ParamLayout,
    mask: ShareMask,
    shared_index: Vec<usize>,
    specialized_index: Vec<usize>,
    shared_values: Vec<f64>,
    specialized_values: Vec<Vec<f64>>,
}

/// Adam state for the shared store and for each task's specialized store.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOptimizer {
    pub shared: AdamState,
    pub specialized: Vec<AdamState>,
}

impl SplitOptimizer {
    /// Fresh moments everywhere.
    pub fn new(mask: &ShareMask, task_count: usize, learning_rate: f64) -> Self {
        Self {
            shared: AdamState::new(mask.shared_count(), learning_rate),
            specialized: vec![AdamState::new(mask.specialized_count(), learning_rate); task_count],
        }
    }

    /// Continue from the joint network's optimizer: every store starts from
    /// the joint moments at its coordinates.
    pub fn from_joint(joint: &AdamState, mask: &ShareMask, task_count: usize) -> Self {
        let specialized = joint.gather(&mask.specialized_indices());
        Self {
            shared: joint.gather(&mask.shared_indices()),
            specialized: vec![specialized; task_count],
        }
    }
}

/// Build the split network from the jointly trained parameters.
pub fn split_policy(
    joint_params: &ParamVector,
    layout: &ParamLayout,
    mask: ShareMask,
    task_count: usize,
) -> Result<SplitPolicy> {
    SplitPolicy::new(joint_params, layout, mask, task_count)
}

impl SplitPolicy {
    pub fn new(
        joint_params: &ParamVector,
        layout: &ParamLayout,
        mask: ShareMask,
        task_count: usize,
    ) -> Result<Self> {
        if task_count < 1 {
            return Err(Error::invalid("split policy needs at least one task"));
        }
        check_len("parameter vector", layout.num_params(), joint_params.len())?;
        check_len("share mask", layout.num_params(), mask.len())?;
        let shared_index = mask.shared_indices();
        let specialized_index = mask.specialized_indices();
        let p = joint_params.as_slice();
        let shared_values = shared_index.iter().map(|&i| p[i]).collect();
        let copy: Vec<f64> = specialized_index.iter().map(|&i| p[i]).collect();
        Ok(Self {
            layout: layout.clone(),
            mask,
            shared_index,
            specialized_index,
            shared_values,
            specialized_values: vec![copy; task_count],
        })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn mask(&self) -> &ShareMask {
        &self.mask
    }

    pub fn task_count(&self) -> usize {
        self.specialized_values.len()
    }

    fn check_task(&self, task: usize) -> Result<()> {
        if task >= self.task_count() {
            return Err(Error::invalid(format!(
                "task id {task} out of range for {} tasks",
                self.task_count()
            )));
        }
        Ok(())
    }

    /// Task `task`'s full parameter vector.
    pub fn materialize(&self, task: usize) -> Result<ParamVector> {
        self.check_task(task)?;
        let mut p = vec![0.0; self.layout.num_params()];
        for (&i, &v) in self.shared_index.iter().zip(&self.shared_values) {
            p[i] = v;
        }
        for (&i, &v) in self
            .specialized_index
            .iter()
            .zip(&self.specialized_values[task])
        {
            p[i] = v;
        }
        Ok(ParamVector::new(p).expect("stored parameters stay finite"))
    }

    pub fn split_forward(&self, task: usize, obs: &[f64]) -> Result<GaussianActionDistribution> {
        check_len("observation", self.layout.input_dim(), obs.len())?;
        let params = self.materialize(task)?;
        let mut ws = Workspace::new(&self.layout);
        let mean = forward_into(params.as_slice(), &self.layout, obs, &mut ws).to_vec();
        let logstd = params.as_slice()[self.layout.logstd_range().expect("policy layout")].to_vec();
        GaussianActionDistribution::new(mean, logstd)
    }

    /// Overwrite one coordinate as seen by `task`. Writing a shared
    /// coordinate changes it for every task.
    pub fn set_value(&mut self, task: usize, index: usize, value: f64) -> Result<()> {
        self.check_task(task)?;
        if index >= self.mask.len() {
            return Err(Error::invalid(format!(
                "parameter index {index} out of range"
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("parameter value"));
        }
        if self.mask.is_shared(index) {
            let k = self.shared_index.binary_search(&index).expect("indexed");
            self.shared_values[k] = value;
        } else {
            let k = self
                .specialized_index
                .binary_search(&index)
                .expect("indexed");
            self.specialized_values[task][k] = value;
        }
        Ok(())
    }

    /// Apply one optimizer step from per-task gradients over the full layout.
    ///
    /// Shared coordinates step on the task-mean gradient; each task's
    /// specialized coordinates step on that task's own gradient. Either the
    /// whole update applies or none of it does.
    pub fn split_update(&mut self, grads: &GradientMatrix, opt: &mut SplitOptimizer) -> Result<()> {
        let n = self.task_count();
        check_len("gradient rows", n, grads.task_count())?;
        check_len("gradient row", self.layout.num_params(), grads.num_params())?;
        check_len("specialized optimizers", n, opt.specialized.len())?;
        check_len(
            "shared optimizer",
            self.shared_index.len(),
            opt.shared.len(),
        )?;
        for s in &opt.specialized {
            check_len(
                "specialized optimizer",
                self.specialized_index.len(),
                s.len(),
            )?;
        }

        let mean = grads.mean_row();
        let shared_grad: Vec<f64> = self.shared_index.iter().map(|&i| mean[i]).collect();
        let task_grads: Vec<Vec<f64>> = grads
            .rows()
            .iter()
            .map(|row| self.specialized_index.iter().map(|&i| row[i]).collect())
            .collect();

        // GradientMatrix rows are finite, so these steps cannot fail midway.
        opt.shared.step(&mut self.shared_values, &shared_grad)?;
        for ((values, state), g) in self
            .specialized_values
            .iter_mut()
            .zip(&mut opt.specialized)
            .zip(&task_grads)
        {
            state.step(values, g)?;
        }
        Ok(())
    }
}
