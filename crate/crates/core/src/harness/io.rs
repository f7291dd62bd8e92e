use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{aggregate::median, aggregate_runs, IterationRow, RunRecord, Summary, SummaryRow};
use crate::error::{Error, Result};

pub const RUN_HEADER: &str = "iteration,task_id,mean_return,episode_count,policy_loss,value_loss";
pub const SUMMARY_HEADER: &str = "iteration,mean_over_seeds,std_over_seeds,task_id";

/// Summary line as stored on disk, `task_id` -1 marking the task average.
#[derive(Serialize, Deserialize)]
struct SummaryRecord {
    iteration: usize,
    mean_over_seeds: f64,
    std_over_seeds: f64,
    task_id: i64,
}

fn write_csv<W: Write, T: Serialize>(
    out: W,
    header: &str,
    records: impl IntoIterator<Item = T>,
) -> Result<()> {
    // Header written by hand so an empty table still gets one.
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn artifact_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Artifact {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn read_csv<R: Read, T: DeserializeOwned>(reader: R, path: &Path, header: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    let found = r.headers().map_err(|e| artifact_err(path, e.to_string()))?;
    if found.iter().ne(header.split(',')) {
        return Err(artifact_err(path, format!("expected header {header:?}")));
    }
    r.deserialize()
        .map(|rec| rec.map_err(|e| artifact_err(path, e.to_string())))
        .collect()
}

pub fn write_run_csv<W: Write>(w: W, rows: &[IterationRow]) -> Result<()> {
    write_csv(w, RUN_HEADER, rows)
}

/// `path` only labels errors.
pub fn read_run_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<IterationRow>> {
    read_csv(reader, path, RUN_HEADER)
}

pub fn write_summary_csv<W: Write>(w: W, summary: &Summary) -> Result<()> {
    write_csv(
        w,
        SUMMARY_HEADER,
        summary.rows.iter().map(|r| SummaryRecord {
            iteration: r.iteration,
            mean_over_seeds: r.mean_over_seeds,
            std_over_seeds: r.std_over_seeds,
            task_id: r.task_id.map_or(-1, |t| t as i64),
        }),
    )
}

pub fn read_summary_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<SummaryRow>> {
    let records: Vec<SummaryRecord> = read_csv(reader, path, SUMMARY_HEADER)?;
    Ok(records
        .into_iter()
        .map(|r| SummaryRow {
            iteration: r.iteration,
            task_id: usize::try_from(r.task_id).ok(),
            mean_over_seeds: r.mean_over_seeds,
            std_over_seeds: r.std_over_seeds,
        })
        .collect())
}

/// Left-aligned first column, right-aligned numbers, two-space gutters.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&line(
        widths
            .iter()
            .map(|&w| "-".repeat(w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

const CELL_HEADER: &str = "cell,seeds,final_mean,final_median,final_std";

#[derive(Serialize)]
struct CellRecord {
    cell: String,
    seeds: usize,
    final_mean: f64,
    final_median: f64,
    final_std: f64,
}

pub struct ReportOutput {
    pub csv: PathBuf,
    pub table: PathBuf,
    pub text: String,
}

fn run_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(seed) = name
            .strip_prefix("run_seed")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            found.push((seed, path));
        }
    }
    found.sort();
    Ok(found)
}

fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    run_files(dir)?
        .into_iter()
        .map(|(seed, path)| {
            let rows = read_run_csv(fs::File::open(&path)?, &path)?;
            Ok(RunRecord::from_rows(seed, rows))
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Summarize a directory. A directory holding `run_seed*.csv` files gets
/// `summary.csv` and `summary.txt`; a directory of such directories (a grid)
/// gets `table.csv` and `table.txt` with one final-performance line per cell.
pub fn report_dir(dir: &Path) -> Result<ReportOutput> {
    if !dir.is_dir() {
        return Err(artifact_err(dir, "not a directory"));
    }
    let records = load_records(dir)?;
    if !records.is_empty() {
        let summary = aggregate_runs(&records)?;
        let csv = dir.join("summary.csv");
        write_summary_csv(fs::File::create(&csv)?, &summary)?;
        let rows: Vec<Vec<String>> = summary
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.iteration.to_string(),
                    r.task_id.map_or("all".to_string(), |t| t.to_string()),
                    fmt(r.mean_over_seeds),
                    fmt(r.std_over_seeds),
                ]
            })
            .collect();
        let mut text = render_table(&["iteration", "task", "mean", "std"], &rows);
        text.push_str(&format!(
            "\nfinal performance (last {} iterations): mean {} median {} over {} seeds\n",
            super::FINAL_WINDOW,
            fmt(summary.final_overall),
            fmt(summary.median_final()),
            records.len()
        ));
        let table = dir.join("summary.txt");
        fs::write(&table, &text)?;
        return Ok(ReportOutput { csv, table, text });
    }

    let mut cells: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    cells.sort();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for cell in cells {
        let runs = load_records(&cell)?;
        if runs.is_empty() {
            continue;
        }
        let summary = aggregate_runs(&runs)?;
        let n = summary.final_per_seed.len() as f64;
        let std = (summary
            .final_per_seed
            .iter()
            .map(|v| (v - summary.final_overall).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let name = cell
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("?")
            .to_string();
        let med = median(&summary.final_per_seed);
        records.push(CellRecord {
            cell: name.clone(),
            seeds: runs.len(),
            final_mean: summary.final_overall,
            final_median: med,
            final_std: std,
        });
        rows.push(vec![
            name,
            runs.len().to_string(),
            fmt(summary.final_overall),
            fmt(med),
            fmt(std),
        ]);
    }
    if rows.is_empty() {
        return Err(artifact_err(dir, "no run_seed*.csv files found"));
    }
    let csv = dir.join("table.csv");
    write_csv(fs::File::create(&csv)?, CELL_HEADER, records)?;
    let text = render_table(
        &["cell", "seeds", "final_mean", "final_median", "final_std"],
        &rows,
    );
    let table = dir.join("table.txt");
    fs::write(&table, &text)?;
    Ok(ReportOutput { csv, table, text })
}
