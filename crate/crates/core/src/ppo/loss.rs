use super::{PPOConfig, RolloutBatch};
use crate::error::{check_finite, check_len, Error, Result};
use crate::nn::{accumulate_gradient, forward_into, ParamLayout, ParamVector, Workspace};

/// Per-sample clipped surrogate `min(rA, clip(r)A)` and its derivative with
/// respect to log π(a|s).
///
/// When the clipped branch is the smaller one the ratio lies outside the
/// trust region and the derivative is 0.
pub fn ppo_surrogate_terms(log_ratio: f64, advantage: f64, epsilon: f64) -> Result<(f64, f64)> {
    let r = log_ratio.exp();
    if !r.is_finite() {
        return Err(Error::NonFinite("probability ratio"));
    }
    let unclipped = r * advantage;
    let clipped = r.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    if unclipped <= clipped {
        Ok((unclipped, unclipped))
    } else {
        Ok((clipped, 0.0))
    }
}

fn check_batch(layout: &ParamLayout, batch: &RolloutBatch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("empty rollout batch"));
    }
    check_len("advantages", batch.len(), batch.advantages.len())?;
    check_len("old log-probs", batch.len(), batch.old_logprobs.len())?;
    check_finite("advantages", &batch.advantages)?;
    if !layout.includes_logstd() {
        return Err(Error::invalid("policy layout needs log-std slots"));
    }
    Ok(())
}

/// Adds the gradient of the surrogate loss averaged over `indices` into
/// `grad` and returns that loss.
pub(crate) fn accumulate_ppo_gradient(
    params: &[f64],
    layout: &ParamLayout,
    batch: &RolloutBatch,
    indices: &[usize],
    epsilon: f64,
    grad: &mut [f64],
    ws: &mut Workspace,
) -> Result<f64> {
    let act_dim = layout.output_dim();
    let logstd = &params[layout.logstd_range().expect("policy layout")];
    let inv_var: Vec<f64> = logstd.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let scale = 1.0 / indices.len() as f64;
    let mut out_grad = vec![0.0; 2 * act_dim];
    let mut loss = 0.0;
    for &t in indices {
        let obs = &batch.observations[t];
        let action = &batch.actions[t];
        let mean = forward_into(params, layout, obs, ws);
        let mut logp = 0.0;
        for j in 0..act_dim {
            let z2 = (action[j] - mean[j]).powi(2) * inv_var[j];
            logp -= logstd[j] + 0.918_938_533_204_672_7 + 0.5 * z2;
        }
        let (surrogate, d_logp) =
            ppo_surrogate_terms(logp - batch.old_logprobs[t], batch.advantages[t], epsilon)?;
        loss -= surrogate * scale;
        if d_logp == 0.0 {
            continue;
        }
        let coeff = -d_logp * scale;
        for j in 0..act_dim {
            let diff = action[j] - mean[j];
            out_grad[j] = coeff * diff * inv_var[j];
            out_grad[act_dim + j] = coeff * (diff * diff * inv_var[j] - 1.0);
        }
        accumulate_gradient(params, layout, &out_grad, grad, ws);
    }
    Ok(loss)
}

/// Clipped surrogate loss `-mean_t min(r_t A_t, clip(r_t, 1-ε, 1+ε) A_t)`.
pub fn ppo_loss(
    params: &ParamVector,
    layout: &ParamLayout,
    batch: &RolloutBatch,
    epsilon: f64,
) -> Result<f64> {
    check_len("parameter vector", layout.num_params(), params.len())?;
    check_batch(layout, batch)?;
    let mut ws = Workspace::new(layout);
    let act_dim = layout.output_dim();
    let logstd = &params.as_slice()[layout.logstd_range().expect("checked")];
    let mut total = 0.0;
    for t in 0..batch.len() {
        let mean = forward_into(params.as_slice(), layout, &batch.observations[t], &mut ws);
        let mut logp = 0.0;
        for j in 0..act_dim {
            let z = (batch.actions[t][j] - mean[j]) * (-logstd[j]).exp();
            logp -= logstd[j] + 0.918_938_533_204_672_7 + 0.5 * z * z;
        }
        let (s, _) =
            ppo_surrogate_terms(logp - batch.old_logprobs[t], batch.advantages[t], epsilon)?;
        total += s;
    }
    Ok(-total / batch.len() as f64)
}

/// Full-batch gradient of the surrogate loss for one task, evaluated once at
/// the current parameters.
pub fn task_gradient(
    params: &ParamVector,
    layout: &ParamLayout,
    batch: &RolloutBatch,
    cfg: &PPOConfig,
) -> Result<Vec<f64>> {
    check_len("parameter vector", layout.num_params(), params.len())?;
    check_batch(layout, batch)?;
    let mut grad = vec![0.0; layout.num_params()];
    let indices: Vec<usize> = (0..batch.len()).collect();
    let mut ws = Workspace::new(layout);
    accumulate_ppo_gradient(
        params.as_slice(),
        layout,
        batch,
        &indices,
        cfg.clip_epsilon,
        &mut grad,
        &mut ws,
    )?;
    Ok(grad)
}
