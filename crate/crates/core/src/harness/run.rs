use std::fs;
use std::io::BufWriter;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::{aggregate_runs, write_run_csv, write_summary_csv, ExperimentConfig, Summary, Variant};
use crate::envs::TaskSpec;
use crate::error::Result;
use crate::nn::{AdamState, ParamLayout, ParamVector};
use crate::ppo::{
    collect_rollouts, gae_advantages, ppo_update, split_ppo_update, task_gradient, value_update,
    GaussianPolicy, RolloutBatch, UpdateStats, ValueNet,
};
use crate::rng::{stream, Purpose};
use crate::split::{
    random_mask, select_shared_mask, shared_count_for, specialization_metric, write_mask_artifact,
    GradientMatrix, MetricAccumulator, ShareMask, SplitOptimizer, SplitPolicy, VarianceVector,
    METRIC_WINDOW,
};

/// One CSV row: a task's statistics for one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub task_id: usize,
    pub mean_return: f64,
    pub episode_count: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
}

/// Everything one seed produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<IterationRow>,
    pub mask: Option<ShareMask>,
    pub variance: Option<VarianceVector>,
    /// Environment steps taken per task.
    pub env_steps: Vec<u64>,
    /// Final policy parameters as seen by each task.
    pub final_params: Vec<ParamVector>,
    pub policy_input_dim: usize,
}

impl RunRecord {
    /// Record holding only CSV rows, as read back from disk.
    pub fn from_rows(seed: u64, rows: Vec<IterationRow>) -> Self {
        Self {
            seed,
            rows,
            mask: None,
            variance: None,
            env_steps: Vec::new(),
            final_params: Vec::new(),
            policy_input_dim: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

enum PolicyState {
    Joint {
        params: ParamVector,
        adam: AdamState,
    },
    Split {
        policy: Box<SplitPolicy>,
        opt: SplitOptimizer,
    },
    Independent {
        params: Vec<ParamVector>,
        adams: Vec<AdamState>,
    },
}

impl PolicyState {
    fn task_params(&self, task: usize) -> Result<ParamVector> {
        Ok(match self {
            PolicyState::Joint { params, .. } => params.clone(),
            PolicyState::Split { policy, .. } => policy.materialize(task)?,
            PolicyState::Independent { params, .. } => params[task].clone(),
        })
    }
}

struct Critic {
    net: ValueNet,
    adam: AdamState,
}

fn one_hot(task: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == task { 1.0 } else { 0.0 }).collect()
}

/// Train one seed. `observer` sees every task's policy parameters after
/// each iteration's update.
pub fn run_seed_observed(
    config: &ExperimentConfig,
    seed: u64,
    observer: &mut dyn FnMut(usize, &[ParamVector]),
) -> Result<RunRecord> {
    config.validate()?;
    let tasks: Vec<TaskSpec> = config.tasks()?;
    let n = tasks.len();
    let variant = config.variant;
    let cfg = &config.ppo;
    let hidden = &config.network.hidden;
    let streams: Vec<u64> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| t.stream().unwrap_or(i as u64))
        .collect();

    let suffixes: Vec<Vec<f64>> = (0..n)
        .map(|i| match variant {
            Variant::AppendOnehot => one_hot(i, n),
            _ => Vec::new(),
        })
        .collect();
    let input_dim = tasks[0].obs_dim() + suffixes[0].len();
    let layout = ParamLayout::policy(input_dim, hidden, tasks[0].act_dim())?;
    let value_layout = ParamLayout::value(input_dim, hidden)?;

    let mut state = match variant {
        Variant::NoShare => PolicyState::Independent {
            params: streams
                .iter()
                .map(|&s| layout.init_params(&mut stream(seed, Purpose::PolicyInit, s, 0)))
                .collect(),
            adams: vec![AdamState::new(layout.num_params(), config.network.policy_lr); n],
        },
        _ => PolicyState::Joint {
            params: layout.init_params(&mut stream(seed, Purpose::PolicyInit, 0, 0)),
            adam: AdamState::new(layout.num_params(), config.network.policy_lr),
        },
    };

    let per_task_critic = config.per_task_value || variant == Variant::NoShare;
    let critic_streams: Vec<u64> = if per_task_critic {
        streams.clone()
    } else {
        vec![0]
    };
    let mut critics: Vec<Critic> = critic_streams
        .iter()
        .map(|&s| {
            let params = value_layout.init_params(&mut stream(seed, Purpose::ValueInit, s, 0));
            Ok(Critic {
                net: ValueNet::new(value_layout.clone(), params)?,
                adam: AdamState::new(value_layout.num_params(), config.network.value_lr),
            })
        })
        .collect::<Result<_>>()?;
    let critic_of = |task: usize| if per_task_critic { task } else { 0 };

    let mut metric = MetricAccumulator::new(METRIC_WINDOW);
    let mut mask: Option<ShareMask> = None;
    let mut env_steps = vec![0u64; n];
    let mut rows = Vec::with_capacity(config.total_iterations * n);

    for it in 0..config.total_iterations {
        if variant.splits() && it == config.jt_iterations {
            if let PolicyState::Joint { params, adam } = &state {
                let m = shared_count_for(config.sp_fraction, layout.num_params());
                let new_mask = match variant {
                    Variant::Gradvar => {
                        let averaged = metric.averaged().expect("window filled before split");
                        select_shared_mask(averaged, m)?
                    }
                    _ => {
                        let mut rng = stream(seed, Purpose::RandomMask, 0, 0);
                        random_mask(layout.num_params(), 1.0 - config.sp_fraction, &mut rng)?
                    }
                };
                info!(
                    "seed {seed}: split at iteration {it}, {} of {} parameters shared",
                    new_mask.shared_count(),
                    new_mask.len()
                );
                let opt = SplitOptimizer::from_joint(adam, &new_mask, n);
                let policy = SplitPolicy::new(params, &layout, new_mask.clone(), n)?;
                mask = Some(new_mask);
                state = PolicyState::Split {
                    policy: Box::new(policy),
                    opt,
                };
            }
        }

        let task_params: Vec<ParamVector> = (0..n)
            .map(|i| state.task_params(i))
            .collect::<Result<_>>()?;
        let mut batches: Vec<RolloutBatch> = Vec::with_capacity(n);
        for (i, task) in tasks.iter().enumerate() {
            let mut rng = stream(seed, Purpose::Rollout, streams[i], it as u64);
            let mut policy = GaussianPolicy::new(&task_params[i], &layout)?;
            let mut batch =
                collect_rollouts(task, &mut policy, i, cfg.batch_size, &suffixes[i], &mut rng)?;
            env_steps[i] += batch.env_steps;
            gae_advantages(
                &mut batch,
                &critics[critic_of(i)].net,
                cfg.discount,
                cfg.gae_lambda,
            )?;
            batches.push(batch);
        }

        let in_window = variant == Variant::Gradvar
            && it + METRIC_WINDOW >= config.jt_iterations
            && it < config.jt_iterations;
        if in_window {
            let grads = batches
                .iter()
                .zip(&task_params)
                .map(|(b, p)| task_gradient(p, &layout, b, cfg))
                .collect::<Result<Vec<_>>>()?;
            metric.push(specialization_metric(&GradientMatrix::new(grads)?)?)?;
        }

        let all: Vec<&RolloutBatch> = batches.iter().collect();
        let mut update_rng = stream(seed, Purpose::PolicyUpdate, 0, it as u64);
        let stats: UpdateStats = match &mut state {
            PolicyState::Joint { params, adam } => {
                let (next, stats) = ppo_update(params, &layout, &all, cfg, adam, &mut update_rng)?;
                *params = next;
                stats
            }
            PolicyState::Split { policy, opt } => {
                split_ppo_update(policy, opt, &all, cfg, &mut update_rng)?
            }
            PolicyState::Independent { params, adams } => {
                let mut losses = Vec::with_capacity(n);
                let mut steps = 0;
                for i in 0..n {
                    let mut rng = stream(seed, Purpose::PolicyUpdate, streams[i], it as u64);
                    let (next, s) = ppo_update(
                        &params[i],
                        &layout,
                        &all[i..=i],
                        cfg,
                        &mut adams[i],
                        &mut rng,
                    )?;
                    params[i] = next;
                    losses.push(s.policy_loss[0]);
                    steps += s.steps;
                }
                UpdateStats {
                    policy_loss: losses,
                    steps,
                }
            }
        };

        let mut value_losses = vec![0.0; n];
        if per_task_critic {
            for i in 0..n {
                let mut rng = stream(seed, Purpose::ValueUpdate, streams[i], it as u64);
                let c = &mut critics[i];
                value_losses[i] =
                    value_update(&mut c.net, &all[i..=i], cfg, &mut c.adam, &mut rng)?[0];
            }
        } else {
            let mut rng = stream(seed, Purpose::ValueUpdate, 0, it as u64);
            let c = &mut critics[0];
            value_losses = value_update(&mut c.net, &all, cfg, &mut c.adam, &mut rng)?;
        }

        for (i, b) in batches.iter().enumerate() {
            let entropy: f64 = layout
                .logstd_range()
                .map(|r| {
                    task_params[i].as_slice()[r]
                        .iter()
                        .map(|ls| ls + 1.418_938_533_204_672_7)
                        .sum()
                })
                .unwrap_or(0.0);
            debug!(
                "seed {seed} it {it} task {i}: return {:.3} entropy {entropy:.3}",
                b.mean_episode_return()
            );
            rows.push(IterationRow {
                iteration: it,
                task_id: i,
                mean_return: b.mean_episode_return(),
                episode_count: b.episode_returns.len(),
                policy_loss: stats.policy_loss[i],
                value_loss: value_losses[i],
            });
        }
        let after: Vec<ParamVector> = (0..n)
            .map(|i| state.task_params(i))
            .collect::<Result<_>>()?;
        observer(it, &after);
    }

    let final_params = (0..n)
        .map(|i| state.task_params(i))
        .collect::<Result<_>>()?;
    Ok(RunRecord {
        seed,
        rows,
        mask,
        variance: metric.averaged().cloned(),
        env_steps,
        final_params,
        policy_input_dim: input_dim,
    })
}

pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    run_seed_observed(config, seed, &mut |_, _| {})
}

/// Run every seed, write per-seed CSVs, masks, the summary and a manifest
/// into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut records = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        info!("{} / {}: seed {seed}", config.suite, config.variant);
        let record = run_seed(config, seed)?;
        let f = BufWriter::new(fs::File::create(dir.join(format!("run_seed{seed}.csv")))?);
        write_run_csv(f, &record.rows)?;
        if let Some(mask) = &record.mask {
            let f = BufWriter::new(fs::File::create(dir.join(format!("mask_seed{seed}.txt")))?);
            write_mask_artifact(f, mask, record.variance.as_ref())?;
        }
        records.push(record);
    }
    let summary = aggregate_runs(&records)?;
    write_summary_csv(
        BufWriter::new(fs::File::create(dir.join("summary.csv"))?),
        &summary,
    )?;
    let manifest = serde_json::json!({
        "config": config,
        "dynamics": "low-dimensional surrogate tasks (two-state hopper / point walker), not articulated rigid-body simulation",
        "final_performance": summary.final_overall,
        "final_performance_per_seed": summary.final_per_seed,
        "env_steps_per_task": records.first().map(|r| r.env_steps.clone()),
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(ExperimentOutput { records, summary })
}
