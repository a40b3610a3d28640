use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use echelon_lab::config::ExperimentConfig;
use echelon_lab::report::{render, summarize, Formats, Grid, Source};
use echelon_lab::runner::{evaluate_checkpoint, run_experiment, RunOptions};
use echelon_lab::trajectory::TrajectoryWriter;
use echelon_lab::verify::verify;

#[derive(Parser)]
#[command(name = "echelon", version, about = "Two-echelon supply chain experiments with SAC agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Txt,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Eval,
    Train,
}

#[derive(Subcommand)]
enum Command {
    /// Train every replicate of an experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        seed_base: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        total_days: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate a checkpoint set with deterministic actions.
    Eval {
        #[arg(long)]
        checkpoint_dir: PathBuf,
        #[arg(long)]
        episodes: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check the set against this config instead of its own copy.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Cross-check the environment against the brute-force oracle.
    Verify {
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate run directories into tables and plots.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// demands/schemes/scenarios, e.g. `low,high/collaborative/all`.
        #[arg(long, default_value = "all/all/all")]
        grid: String,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
        #[arg(long)]
        plots: bool,
        #[arg(long, value_enum, default_value_t = SourceArg::Eval)]
        source: SourceArg,
        /// Training episodes to keep, counted from the end, with `--source train`.
        #[arg(long, default_value_t = 100)]
        tail_episodes: usize,
    },
}

/// Exit code for a report whose grid has missing cells.
const INCOMPLETE: u8 = 2;

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train { config, replicates, seed_base, out, total_days, quiet } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = replicates {
                cfg.replicates = n;
                cfg.seeds = None;
            }
            if let Some(s) = seed_base {
                cfg.seed_base = s;
                cfg.seeds = None;
            }
            if let Some(d) = total_days {
                cfg.total_days = d;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let manifest = run_experiment(&cfg, RunOptions { verbose: !quiet })?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
        }
        Command::Eval { checkpoint_dir, episodes, seed, config, trajectory } => {
            let cfg = config.map(|p| ExperimentConfig::load(&p)).transpose()?;
            let mut writer = trajectory.as_deref().map(TrajectoryWriter::create).transpose()?;
            let mut write_err = None;
            let summary = evaluate_checkpoint(&checkpoint_dir, cfg.as_ref(), episodes, seed, |rec| {
                if let (Some(w), None) = (writer.as_mut(), &write_err) {
                    write_err = w.write(rec).err();
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            if let Some(w) = writer {
                w.finish()?;
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Verify { out } => {
            let report = verify()?;
            let json = report.to_json();
            if let Some(path) = out {
                std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
            }
            print!("{json}");
            if !report.passed {
                bail!("oracle cross-check failed: {} mismatches", report.total_mismatches());
            }
        }
        Command::Report { input, out, grid, format, plots, source, tail_episodes } => {
            let grid: Grid = grid.parse()?;
            let source = match source {
                SourceArg::Eval => Source::Eval,
                SourceArg::Train => Source::Train { tail_episodes },
            };
            let formats = Formats { csv: !matches!(format, Format::Txt), txt: !matches!(format, Format::Csv), plots };
            let summary = summarize(&input, source)?;
            let output = render(&summary, &grid, formats, &out)?;
            for f in &output.files {
                println!("{}", f.display());
            }
            if !output.missing.is_empty() {
                let cells: Vec<String> = output.missing.iter().map(|k| k.to_string()).collect();
                eprintln!("warning: no data for {} requested cell(s), marked NA: {}", cells.len(), cells.join(", "));
                return Ok(ExitCode::from(INCOMPLETE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
