use rand::Rng;

use crate::envs::{env_reset, env_step, TaskSpec};
use crate::error::{check_len, Error, Result};
use crate::nn::{forward_into, GaussianActionDistribution, ParamLayout, ParamVector, Workspace};

/// Anything that maps a network input to an action distribution.
pub trait PolicyEvaluator {
    fn distribution(&mut self, input: &[f64]) -> Result<GaussianActionDistribution>;
}

/// MLP mean with state-independent log-std slots.
pub struct GaussianPolicy<'a> {
    params: &'a ParamVector,
    layout: &'a ParamLayout,
    ws: Workspace,
}

impl<'a> GaussianPolicy<'a> {
    pub fn new(params: &'a ParamVector, layout: &'a ParamLayout) -> Result<Self> {
        check_len("parameter vector", layout.num_params(), params.len())?;
        if !layout.includes_logstd() {
            return Err(Error::invalid("policy layout needs log-std slots"));
        }
        Ok(Self {
            params,
            layout,
            ws: Workspace::new(layout),
        })
    }
}

impl PolicyEvaluator for GaussianPolicy<'_> {
    fn distribution(&mut self, input: &[f64]) -> Result<GaussianActionDistribution> {
        check_len("policy input", self.layout.input_dim(), input.len())?;
        let mean = forward_into(self.params.as_slice(), self.layout, input, &mut self.ws).to_vec();
        let range = self.layout.logstd_range().expect("checked in new");
        GaussianActionDistribution::new(mean, self.params.as_slice()[range].to_vec())
    }
}

/// One task's transitions for one iteration.
///
/// Episodes are concatenated. `episode_ends[t]` marks the last step of an
/// episode segment (failure, horizon, or end of batch); `terminals[t]` marks
/// failures, after which nothing is bootstrapped. Observations are stored as
/// network inputs, i.e. including any task encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub task_id: usize,
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub episode_ends: Vec<bool>,
    pub terminals: Vec<bool>,
    /// Network input after a non-failure segment end, for the value bootstrap.
    pub bootstrap_observations: Vec<Option<Vec<f64>>>,
    pub old_logprobs: Vec<f64>,
    pub values: Vec<f64>,
    pub next_values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Undiscounted returns of episodes that finished inside this batch.
    pub episode_returns: Vec<f64>,
    /// Return accumulated by the episode cut off at the end of the batch.
    pub partial_return: Option<f64>,
    /// Number of `env_step` calls made while collecting.
    pub env_steps: u64,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Mean return over completed episodes, falling back to the cut-off
    /// episode when none completed.
    pub fn mean_episode_return(&self) -> f64 {
        if self.episode_returns.is_empty() {
            self.partial_return.unwrap_or(0.0)
        } else {
            self.episode_returns.iter().sum::<f64>() / self.episode_returns.len() as f64
        }
    }
}

fn with_suffix(obs: &[f64], suffix: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(obs.len() + suffix.len());
    v.extend_from_slice(obs);
    v.extend_from_slice(suffix);
    v
}

/// Run the policy on `task` until exactly `batch_size` transitions are
/// stored. `input_suffix` is appended to every observation before it reaches
/// the policy (used for one-hot task encodings).
pub fn collect_rollouts<P: PolicyEvaluator, R: Rng + ?Sized>(
    task: &TaskSpec,
    policy: &mut P,
    task_id: usize,
    batch_size: usize,
    input_suffix: &[f64],
    rng: &mut R,
) -> Result<RolloutBatch> {
    if batch_size == 0 {
        return Err(Error::invalid("batch_size must be positive"));
    }
    let mut batch = RolloutBatch {
        task_id,
        observations: Vec::with_capacity(batch_size),
        actions: Vec::with_capacity(batch_size),
        rewards: Vec::with_capacity(batch_size),
        episode_ends: Vec::with_capacity(batch_size),
        terminals: Vec::with_capacity(batch_size),
        bootstrap_observations: Vec::with_capacity(batch_size),
        old_logprobs: Vec::with_capacity(batch_size),
        values: Vec::new(),
        next_values: Vec::new(),
        advantages: Vec::new(),
        returns: Vec::new(),
        episode_returns: Vec::new(),
        partial_return: None,
        env_steps: 0,
    };
    let (mut state, obs) = env_reset(task, rng);
    let mut input = with_suffix(&obs, input_suffix);
    let mut episode_return = 0.0;
    for t in 0..batch_size {
        let dist = policy.distribution(&input)?;
        let action = dist.sample(rng);
        let logprob = dist.logprob_unchecked(&action);
        let tr = env_step(task, &state, &action)?;
        batch.env_steps += 1;
        episode_return += tr.reward;
        let next_input = with_suffix(&tr.observation, input_suffix);
        let last = t + 1 == batch_size;
        let segment_end = tr.done() || last;

        batch.observations.push(std::mem::take(&mut input));
        batch.actions.push(action);
        batch.rewards.push(tr.reward);
        batch.old_logprobs.push(logprob);
        batch.episode_ends.push(segment_end);
        batch.terminals.push(tr.terminated);
        batch
            .bootstrap_observations
            .push((segment_end && !tr.terminated).then(|| next_input.clone()));

        if tr.done() {
            batch.episode_returns.push(episode_return);
            episode_return = 0.0;
            if !last {
                let (s, obs) = env_reset(task, rng);
                state = s;
                input = with_suffix(&obs, input_suffix);
            }
        } else {
            if last {
                batch.partial_return = Some(episode_return);
            }
            state = tr.state;
            input = next_input;
        }
    }
    Ok(batch)
}
