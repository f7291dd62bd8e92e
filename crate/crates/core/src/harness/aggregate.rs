use serde::Serialize;

use super::RunRecord;
use crate::error::{Error, Result};

/// Number of trailing iterations averaged into the final-performance score.
pub const FINAL_WINDOW: usize = 10;

/// One summary line; `task_id` is `None` for the all-task average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub iteration: usize,
    pub task_id: Option<usize>,
    pub mean_over_seeds: f64,
    pub std_over_seeds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Final performance of each seed, in record order.
    pub final_per_seed: Vec<f64>,
    /// Mean of `final_per_seed`.
    pub final_overall: f64,
}

impl Summary {
    pub fn median_final(&self) -> f64 {
        median(&self.final_per_seed)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Returns indexed `[iteration][task]`, after checking the rows form a full grid.
fn return_grid(record: &RunRecord) -> Result<Vec<Vec<f64>>> {
    let tasks = record.rows.iter().map(|r| r.task_id + 1).max().unwrap_or(0);
    if tasks == 0 || !record.rows.len().is_multiple_of(tasks) {
        return Err(Error::Misaligned(format!(
            "seed {}: {} rows do not form an iteration x task grid",
            record.seed,
            record.rows.len()
        )));
    }
    let iterations = record.rows.len() / tasks;
    let mut grid = vec![vec![f64::NAN; tasks]; iterations];
    for (k, row) in record.rows.iter().enumerate() {
        if row.iteration != k / tasks || row.task_id != k % tasks {
            return Err(Error::Misaligned(format!(
                "seed {}: row {k} is (iteration {}, task {})",
                record.seed, row.iteration, row.task_id
            )));
        }
        grid[row.iteration][row.task_id] = row.mean_return;
    }
    Ok(grid)
}

/// Mean of the all-task average over the last `FINAL_WINDOW` iterations.
pub fn final_performance(record: &RunRecord) -> Result<f64> {
    let grid = return_grid(record)?;
    let start = grid.len().saturating_sub(FINAL_WINDOW);
    let tail: Vec<f64> = grid[start..]
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Per-iteration mean and population standard deviation across seeds.
pub fn aggregate_runs(records: &[RunRecord]) -> Result<Summary> {
    let first = records
        .first()
        .ok_or_else(|| Error::invalid("aggregate_runs needs at least one record"))?;
    let grids = records
        .iter()
        .map(return_grid)
        .collect::<Result<Vec<_>>>()?;
    let (iterations, tasks) = (grids[0].len(), grids[0][0].len());
    for (g, r) in grids.iter().zip(records) {
        if g.len() != iterations || g[0].len() != tasks {
            return Err(Error::Misaligned(format!(
                "seed {} has {}x{} grid, seed {} has {iterations}x{tasks}",
                r.seed,
                g.len(),
                g[0].len(),
                first.seed
            )));
        }
    }
    let mut rows = Vec::with_capacity(iterations * (tasks + 1));
    for it in 0..iterations {
        let averaged: Vec<f64> = grids
            .iter()
            .map(|g| g[it].iter().sum::<f64>() / tasks as f64)
            .collect();
        let (mean, std) = mean_std(&averaged);
        rows.push(SummaryRow {
            iteration: it,
            task_id: None,
            mean_over_seeds: mean,
            std_over_seeds: std,
        });
        for task in 0..tasks {
            let values: Vec<f64> = grids.iter().map(|g| g[it][task]).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SummaryRow {
                iteration: it,
                task_id: Some(task),
                mean_over_seeds: mean,
                std_over_seeds: std,
            });
        }
    }
    let final_per_seed = records
        .iter()
        .map(final_performance)
        .collect::<Result<Vec<_>>>()?;
    let final_overall = final_per_seed.iter().sum::<f64>() / final_per_seed.len() as f64;
    Ok(Summary {
        rows,
        final_per_seed,
        final_overall,
    })
}
