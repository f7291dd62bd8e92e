use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradsplit::harness::{make_grid, report_dir, run_experiment, ExperimentConfig};
use log::info;

#[derive(Parser)]
#[command(
    name = "gradsplit",
    version,
    about = "Multi-task PPO with gradient-guided weight splitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured seeds (repeatable).
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a config into the jt x sp grid plus baselines and run every cell.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a run directory or a grid directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn execute(cli: Cli) -> gradsplit::Result<()> {
    match cli.command {
        Command::Run { config, seeds, out } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if !seeds.is_empty() {
                cfg.seeds = seeds;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let output = run_experiment(&cfg)?;
            println!(
                "{}: final performance {:.3} (median {:.3}) over {} seeds -> {}",
                cfg.variant,
                output.summary.final_overall,
                output.summary.median_final(),
                cfg.seeds.len(),
                cfg.output_dir.display()
            );
        }
        Command::Grid { config, out } => {
            let mut base = ExperimentConfig::from_path(&config)?;
            base.output_dir = out.clone();
            let cells = make_grid(&base)?;
            for (i, cell) in cells.iter().enumerate() {
                info!("cell {}/{}: {}", i + 1, cells.len(), cell.name);
                run_experiment(&cell.config)?;
            }
            print!("{}", report_dir(&out)?.text);
        }
        Command::Report { input } => {
            let report = report_dir(&input)?;
            print!("{}", report.text);
            info!(
                "wrote {} and {}",
                report.csv.display(),
                report.table.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let message = text.split("\n\nUsage").next().unwrap_or(&text);
            eprintln!("{}", message.split_whitespace().collect::<Vec<_>>().join(" "));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
