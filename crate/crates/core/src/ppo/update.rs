use rand::seq::SliceRandom;
use rand::Rng;

use super::{accumulate_ppo_gradient, PPOConfig, RolloutBatch};
use crate::error::{check_len, Error, Result};
use crate::nn::{AdamState, ParamLayout, ParamVector, Workspace};
use crate::split::{GradientMatrix, SplitOptimizer, SplitPolicy};

/// Mean minibatch surrogate loss per task over one update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: Vec<f64>,
    pub steps: usize,
}

/// Drive the PPO epoch/minibatch schedule over several equally long batches.
///
/// Each epoch reshuffles every batch independently; step `k` hands `f` the
/// `k`-th minibatch of indices from each batch.
pub fn for_each_minibatch<R, F>(
    lens: &[usize],
    cfg: &PPOConfig,
    rng: &mut R,
    mut f: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&[&[usize]]) -> Result<()>,
{
    let Some(&len) = lens.first() else {
        return Err(Error::invalid("no batches to update on"));
    };
    if len == 0 {
        return Err(Error::invalid("empty rollout batch"));
    }
    for &l in lens {
        check_len("pooled batch length", len, l)?;
    }
    let mut perms: Vec<Vec<usize>> = vec![(0..len).collect(); lens.len()];
    for _ in 0..cfg.epochs_per_iter {
        for p in perms.iter_mut() {
            p.shuffle(rng);
        }
        let mut start = 0;
        while start < len {
            let end = (start + cfg.minibatch_size).min(len);
            let slices: Vec<&[usize]> = perms.iter().map(|p| &p[start..end]).collect();
            f(&slices)?;
            start = end;
        }
    }
    Ok(())
}

/// PPO policy update for one network on one or more task batches.
///
/// Every minibatch step takes the task-mean of the per-task minibatch
/// gradients, i.e. the gradient of the loss over the pooled minibatch.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &ParamVector,
    layout: &ParamLayout,
    batches: &[&RolloutBatch],
    cfg: &PPOConfig,
    adam: &mut AdamState,
    rng: &mut R,
) -> Result<(ParamVector, UpdateStats)> {
    check_len("parameter vector", layout.num_params(), params.len())?;
    check_len("optimizer state", layout.num_params(), adam.len())?;
    for b in batches {
        check_len("advantages", b.len(), b.advantages.len())?;
    }
    let mut current = params.clone();
    let mut ws = Workspace::new(layout);
    let mut loss_sums = vec![0.0; batches.len()];
    let mut steps = 0;
    let lens: Vec<usize> = batches.iter().map(|b| b.len()).collect();
    for_each_minibatch(&lens, cfg, rng, |mb| {
        let mut rows = Vec::with_capacity(batches.len());
        for (k, (b, idx)) in batches.iter().zip(mb).enumerate() {
            let mut g = vec![0.0; layout.num_params()];
            loss_sums[k] += accumulate_ppo_gradient(
                current.as_slice(),
                layout,
                b,
                idx,
                cfg.clip_epsilon,
                &mut g,
                &mut ws,
            )?;
            rows.push(g);
        }
        let grad = GradientMatrix::new(rows)?.mean_row();
        adam.step(current.as_mut_slice(), &grad)?;
        steps += 1;
        Ok(())
    })?;
    let policy_loss = loss_sums.iter().map(|s| s / steps.max(1) as f64).collect();
    Ok((current, UpdateStats { policy_loss, steps }))
}

/// PPO update of a split policy: batch `i` belongs to task `i`, each task's
/// minibatch gradient is taken at that task's materialized parameters, and
/// the step goes through [`SplitPolicy::split_update`].
pub fn split_ppo_update<R: Rng + ?Sized>(
    policy: &mut SplitPolicy,
    opt: &mut SplitOptimizer,
    batches: &[&RolloutBatch],
    cfg: &PPOConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    check_len("task batches", policy.task_count(), batches.len())?;
    for b in batches {
        check_len("advantages", b.len(), b.advantages.len())?;
    }
    let layout = policy.layout().clone();
    let mut ws = Workspace::new(&layout);
    let mut loss_sums = vec![0.0; batches.len()];
    let mut steps = 0;
    let lens: Vec<usize> = batches.iter().map(|b| b.len()).collect();
    for_each_minibatch(&lens, cfg, rng, |mb| {
        let mut rows = Vec::with_capacity(batches.len());
        for (task, (b, idx)) in batches.iter().zip(mb).enumerate() {
            let params = policy.materialize(task)?;
            let mut g = vec![0.0; layout.num_params()];
            loss_sums[task] += accumulate_ppo_gradient(
                params.as_slice(),
                &layout,
                b,
                idx,
                cfg.clip_epsilon,
                &mut g,
                &mut ws,
            )?;
            rows.push(g);
        }
        policy.split_update(&GradientMatrix::new(rows)?, opt)?;
        steps += 1;
        Ok(())
    })?;
    let policy_loss = loss_sums.iter().map(|s| s / steps.max(1) as f64).collect();
    Ok(UpdateStats { policy_loss, steps })
}
