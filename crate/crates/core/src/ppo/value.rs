use rand::Rng;

use super::{for_each_minibatch, PPOConfig, RolloutBatch};
use crate::error::{check_len, Error, Result};
use crate::nn::{
    accumulate_gradient, forward_into, AdamState, ParamLayout, ParamVector, Workspace,
};
use crate::split::GradientMatrix;

/// State-value network V(s).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    pub layout: ParamLayout,
    pub params: ParamVector,
}

impl ValueNet {
    pub fn new(layout: ParamLayout, params: ParamVector) -> Result<Self> {
        if layout.output_dim() != 1 || layout.includes_logstd() {
            return Err(Error::invalid(
                "value network must have one output and no log-std",
            ));
        }
        check_len("value parameters", layout.num_params(), params.len())?;
        Ok(Self { layout, params })
    }

    pub fn predict(&self, obs: &[f64]) -> Result<f64> {
        Ok(crate::nn::mlp_forward(&self.params, &self.layout, obs)?[0])
    }

    pub fn predict_batch(&self, obs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut ws = Workspace::new(&self.layout);
        obs.iter()
            .map(|o| {
                check_len("observation", self.layout.input_dim(), o.len())?;
                let v = forward_into(self.params.as_slice(), &self.layout, o, &mut ws)[0];
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite("value prediction"))
                }
            })
            .collect()
    }
}

fn accumulate_value_gradient(
    params: &[f64],
    layout: &ParamLayout,
    batch: &RolloutBatch,
    indices: &[usize],
    grad: &mut [f64],
    ws: &mut Workspace,
) -> f64 {
    let scale = 1.0 / indices.len() as f64;
    let mut loss = 0.0;
    for &t in indices {
        let v = forward_into(params, layout, &batch.observations[t], ws)[0];
        let err = v - batch.returns[t];
        loss += 0.5 * err * err * scale;
        if err != 0.0 {
            accumulate_gradient(params, layout, &[err * scale], grad, ws);
        }
    }
    loss
}

/// `½ mean_t (V(s_t) - return_t)²` over the whole batch, with its gradient.
pub fn value_loss(vnet: &ValueNet, batch: &RolloutBatch) -> Result<(f64, Vec<f64>)> {
    check_len("returns", batch.len(), batch.returns.len())?;
    if batch.is_empty() {
        return Err(Error::invalid("empty rollout batch"));
    }
    let mut grad = vec![0.0; vnet.layout.num_params()];
    let mut ws = Workspace::new(&vnet.layout);
    let indices: Vec<usize> = (0..batch.len()).collect();
    let loss = accumulate_value_gradient(
        vnet.params.as_slice(),
        &vnet.layout,
        batch,
        &indices,
        &mut grad,
        &mut ws,
    );
    Ok((loss, grad))
}

/// Regress V onto the batch returns with the PPO epoch/minibatch schedule.
/// With several batches, each minibatch step averages the per-task
/// gradients. Returns the mean minibatch loss per batch.
pub fn value_update<R: Rng + ?Sized>(
    vnet: &mut ValueNet,
    batches: &[&RolloutBatch],
    cfg: &PPOConfig,
    adam: &mut AdamState,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for b in batches {
        check_len("returns", b.len(), b.returns.len())?;
    }
    let n = vnet.layout.num_params();
    let mut ws = Workspace::new(&vnet.layout);
    let mut loss_sums = vec![0.0; batches.len()];
    let mut steps = 0usize;
    let lens: Vec<usize> = batches.iter().map(|b| b.len()).collect();
    for_each_minibatch(&lens, cfg, rng, |mb| {
        let mut rows = Vec::with_capacity(batches.len());
        for (k, (b, idx)) in batches.iter().zip(mb).enumerate() {
            let mut g = vec![0.0; n];
            loss_sums[k] += accumulate_value_gradient(
                vnet.params.as_slice(),
                &vnet.layout,
                b,
                idx,
                &mut g,
                &mut ws,
            );
            rows.push(g);
        }
        let grad = GradientMatrix::new(rows)?.mean_row();
        adam.step(vnet.params.as_mut_slice(), &grad)?;
        steps += 1;
        Ok(())
    })?;
    Ok(loss_sums
        .into_iter()
        .map(|s| s / steps.max(1) as f64)
        .collect())
}
