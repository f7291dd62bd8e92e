use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{suite, TaskSpec};
use crate::error::{Error, Result};
use crate::ppo::PPOConfig;
use crate::split::METRIC_WINDOW;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Joint training, variance-guided split, specialization.
    Gradvar,
    /// Same schedule with a uniformly random mask.
    RandomSplit,
    /// One network for all tasks throughout.
    FullShare,
    /// Independent networks trained from scratch.
    NoShare,
    /// One network with a one-hot task id appended to its input.
    AppendOnehot,
}

impl Variant {
    pub fn splits(self) -> bool {
        matches!(self, Variant::Gradvar | Variant::RandomSplit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Gradvar => "gradvar",
            Variant::RandomSplit => "random_split",
            Variant::FullShare => "full_share",
            Variant::NoShare => "no_share",
            Variant::AppendOnehot => "append_onehot",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub hidden: Vec<usize>,
    pub policy_lr: f64,
    pub value_lr: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64, 64],
            policy_lr: 3e-4,
            value_lr: 1e-3,
        }
    }
}

/// Axes of the jt × sp grid, in joint iterations and specialized fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridAxes {
    pub jt: Vec<usize>,
    pub sp: Vec<f64>,
}

impl Default for GridAxes {
    fn default() -> Self {
        Self {
            jt: vec![10, 50, 100],
            sp: vec![0.05, 0.25, 0.5],
        }
    }
}

fn default_total() -> usize {
    200
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in suite name, or a label when `tasks` is given.
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<Vec<TaskSpec>>,
    pub variant: Variant,
    #[serde(default)]
    pub jt_iterations: usize,
    #[serde(default)]
    pub sp_fraction: f64,
    #[serde(default = "default_total")]
    pub total_iterations: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub ppo: PPOConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    /// One critic per task instead of a shared one. Off by default.
    #[serde(default)]
    pub per_task_value: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridAxes>,
}

impl ExperimentConfig {
    pub fn new(suite: &str, variant: Variant) -> Self {
        Self {
            suite: suite.to_string(),
            tasks: None,
            variant,
            jt_iterations: 0,
            sp_fraction: 0.0,
            total_iterations: default_total(),
            seeds: default_seeds(),
            ppo: PPOConfig::default(),
            network: NetworkConfig::default(),
            per_task_value: false,
            output_dir: default_output_dir(),
            grid: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn tasks(&self) -> Result<Vec<TaskSpec>> {
        match &self.tasks {
            Some(t) => Ok(t.clone()),
            None => suite(&self.suite).ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite '{}' (known: {})",
                    self.suite,
                    crate::envs::SUITE_NAMES.join(", ")
                ))
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        self.ppo.validate()?;
        let tasks = self.tasks()?;
        if tasks.is_empty() {
            return fail("at least one task is required".into());
        }
        for t in &tasks {
            t.validate()?;
        }
        let (obs, act) = (tasks[0].obs_dim(), tasks[0].act_dim());
        if tasks
            .iter()
            .any(|t| t.obs_dim() != obs || t.act_dim() != act)
        {
            return fail("all tasks in a suite must share observation and action sizes".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.total_iterations == 0 {
            return fail("total_iterations must be positive".into());
        }
        if self.network.hidden.contains(&0) {
            return fail("hidden widths must be positive".into());
        }
        for (what, lr) in [
            ("policy_lr", self.network.policy_lr),
            ("value_lr", self.network.value_lr),
        ] {
            if !(lr.is_finite() && lr > 0.0) {
                return fail(format!("{what} must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.sp_fraction) {
            return fail(format!("sp_fraction {} outside [0, 1]", self.sp_fraction));
        }
        if self.jt_iterations > self.total_iterations {
            return fail("jt_iterations exceeds total_iterations".into());
        }
        match self.variant {
            Variant::FullShare if self.sp_fraction != 0.0 => {
                fail("full_share requires sp_fraction 0".into())
            }
            Variant::NoShare if self.jt_iterations != 0 || self.sp_fraction != 1.0 => {
                fail("no_share requires jt_iterations 0 and sp_fraction 1".into())
            }
            Variant::Gradvar | Variant::RandomSplit => {
                if tasks.len() < 2 {
                    return fail(format!("{} needs at least two tasks", self.variant));
                }
                if self.variant == Variant::Gradvar && self.jt_iterations < METRIC_WINDOW {
                    return fail(format!(
                        "gradvar averages the metric over the last {METRIC_WINDOW} joint iterations; \
                         jt_iterations must be at least {METRIC_WINDOW}"
                    ));
                }
                if self.jt_iterations + METRIC_WINDOW > self.total_iterations {
                    return fail(format!(
                        "jt_iterations + {METRIC_WINDOW} must not exceed total_iterations"
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
