use super::{RolloutBatch, ValueNet};
use crate::error::{check_finite, check_len, Result};

/// Raw GAE advantages from per-step pieces.
///
/// `next_values[t]` is V(s_{t+1}); it is ignored where `terminals[t]`.
/// The recursion restarts after every `episode_ends[t]`.
pub fn gae_from_parts(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    terminals: &[bool],
    episode_ends: &[bool],
    discount: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let bootstrap = if terminals[t] {
            0.0
        } else {
            discount * next_values[t]
        };
        let delta = rewards[t] + bootstrap - values[t];
        if episode_ends[t] {
            running = 0.0;
        }
        running = delta + discount * lambda * running;
        adv[t] = running;
    }
    adv
}

/// Shift and scale to zero mean, unit (population) variance. Constant
/// inputs are left untouched.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        let std = var.sqrt();
        for a in adv.iter_mut() {
            *a = (*a - mean) / std;
        }
    }
}

/// Fill values, advantages and returns for one task batch.
///
/// Returns are the value-regression targets `A_t + V(s_t)`, taken before
/// the advantages are normalized.
pub fn gae_advantages(
    batch: &mut RolloutBatch,
    vnet: &ValueNet,
    discount: f64,
    lambda: f64,
) -> Result<()> {
    let n = batch.len();
    check_len("episode_ends", n, batch.episode_ends.len())?;
    check_len("terminals", n, batch.terminals.len())?;
    let values = vnet.predict_batch(&batch.observations)?;
    let mut next_values = vec![0.0; n];
    for t in 0..n {
        next_values[t] = if batch.terminals[t] {
            0.0
        } else if batch.episode_ends[t] {
            match &batch.bootstrap_observations[t] {
                Some(obs) => vnet.predict(obs)?,
                None => 0.0,
            }
        } else {
            values[t + 1]
        };
    }
    let mut adv = gae_from_parts(
        &batch.rewards,
        &values,
        &next_values,
        &batch.terminals,
        &batch.episode_ends,
        discount,
        lambda,
    );
    check_finite("advantages", &adv)?;
    batch.returns = adv.iter().zip(&values).map(|(a, v)| a + v).collect();
    normalize_advantages(&mut adv);
    batch.values = values;
    batch.next_values = next_values;
    batch.advantages = adv;
    Ok(())
}
