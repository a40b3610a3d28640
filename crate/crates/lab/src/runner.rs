//! Training and evaluation runs with their on-disk layout:
//!
//! ```text
//! <out_dir>/config.toml          effective configuration (hashed)
//! <out_dir>/manifest.json        seeds, timestamps, file paths
//! <out_dir>/summary.json         per-replicate evaluation and training metrics
//! <out_dir>/rep_00/train.csv     every training day
//! <out_dir>/rep_00/eval.csv      deterministic evaluation episodes
//! <out_dir>/rep_00/metrics.json
//! <out_dir>/rep_00/checkpoints/day_010000/  intermediate checkpoint sets
//! <out_dir>/rep_00/checkpoints/final/
//! ```

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use echelon_core::metrics::{MetricsAccumulator, MetricsSummary};
use echelon_core::policy::{Learned, OrderingPolicy};
use echelon_core::sac::ActMode;
use echelon_core::training::{evaluate, evaluate_agents, AgentPair, EvalSetup, TrainError, Trainer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::checkpoints::{load_set, save_set, CheckpointSetError, CONFIG_FILE};
use crate::config::{ConfigError, ExperimentConfig};
use crate::trajectory::{TrajectoryError, TrajectoryWriter};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAIN_FILE: &str = "train.csv";
pub const EVAL_FILE: &str = "eval.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointSetError),
    #[error("replicate {replicate}: {source}")]
    Train { replicate: usize, source: TrainError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.into(), source }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(io(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateManifest {
    pub index: usize,
    pub seed: u64,
    pub days: u64,
    pub episodes: u64,
    /// Paths are relative to the run directory.
    pub train_trajectory: PathBuf,
    pub eval_trajectory: PathBuf,
    pub metrics: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: PathBuf,
    pub config_sha256: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub summary: PathBuf,
    pub replicates: Vec<ReplicateManifest>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(io(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Io { path, source: std::io::Error::new(std::io::ErrorKind::InvalidData, e) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateMetrics {
    pub index: usize,
    pub seed: u64,
    /// Deterministic evaluation after training.
    pub eval: MetricsSummary,
    /// Stochastic-policy training days, all of them.
    pub train: MetricsSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub verbose: bool,
}

/// Trains every replicate of `cfg`, one worker per replicate.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunManifest, RunError> {
    cfg.validate()?;
    let started = unix_now();
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io(&out))?;
    let text = cfg.to_toml();
    let config_path = out.join(CONFIG_FILE);
    std::fs::write(&config_path, &text).map_err(io(&config_path))?;

    let seeds = cfg.seeds();
    let results: Vec<(ReplicateManifest, ReplicateMetrics)> =
        seeds.par_iter().enumerate().map(|(index, &seed)| run_replicate(cfg, index, seed, opts)).collect::<Result<_, _>>()?;
    let (replicates, metrics): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    write_json(&out.join(SUMMARY_FILE), &metrics)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config: CONFIG_FILE.into(),
        config_sha256: sha256_hex(text.as_bytes()),
        started_unix: started,
        finished_unix: unix_now(),
        summary: SUMMARY_FILE.into(),
        replicates,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn run_replicate(cfg: &ExperimentConfig, index: usize, seed: u64, opts: RunOptions) -> Result<(ReplicateManifest, ReplicateMetrics), RunError> {
    let train_err = |source| RunError::Train { replicate: index, source };
    let rel = PathBuf::from(format!("rep_{index:02}"));
    let dir = cfg.out_dir.join(&rel);
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;

    let setup = cfg.train_setup();
    let mut trainer = Trainer::<f32>::new(setup.clone(), seed).map_err(train_err)?;
    let mut writer = TrajectoryWriter::create(&dir.join(TRAIN_FILE))?;
    let mut acc = MetricsAccumulator::new(setup.scheme);
    let mut checkpoints = Vec::new();
    let interval = if cfg.checkpoint_interval == 0 { cfg.total_days } else { cfg.checkpoint_interval };

    while trainer.progress().days < cfg.total_days {
        let chunk = interval.min(cfg.total_days - trainer.progress().days);
        let mut write_err = None;
        trainer
            .run(chunk, |rec| {
                acc.push(rec);
                if write_err.is_none() {
                    write_err = writer.write(rec).err();
                }
            })
            .map_err(train_err)?;
        if let Some(e) = write_err {
            return Err(e.into());
        }
        let days = trainer.progress().days;
        if days < cfg.total_days {
            let name = rel.join("checkpoints").join(format!("day_{days:06}"));
            save_set(&cfg.out_dir.join(&name), trainer.agents(), cfg)?;
            checkpoints.push(name);
        }
        if opts.verbose {
            eprintln!("[rep {index:02} seed {seed}] day {days}/{}", cfg.total_days);
        }
    }
    writer.finish()?;
    let progress = trainer.progress();
    let final_name = rel.join("checkpoints").join("final");
    save_set(&cfg.out_dir.join(&final_name), trainer.agents(), cfg)?;
    checkpoints.push(final_name);

    let mut agents = trainer.into_agents();
    let mut eval_writer = TrajectoryWriter::create(&dir.join(EVAL_FILE))?;
    let mut write_err = None;
    let eval = evaluate_agents(&mut agents, cfg.observation, &EvalSetup::from(&setup), cfg.eval_episodes, seed, |rec| {
        if write_err.is_none() {
            write_err = eval_writer.write(rec).err();
        }
    })
    .map_err(train_err)?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    eval_writer.finish()?;

    let metrics = ReplicateMetrics { index, seed, eval, train: acc.summary() };
    write_json(&dir.join("metrics.json"), &metrics)?;
    let manifest = ReplicateManifest {
        index,
        seed,
        days: progress.days,
        episodes: metrics.train.episodes as u64,
        train_trajectory: rel.join(TRAIN_FILE),
        eval_trajectory: rel.join(EVAL_FILE),
        metrics: rel.join("metrics.json"),
        checkpoints,
    };
    Ok((manifest, metrics))
}

/// Evaluates a checkpoint set with deterministic actions. Records are
/// handed to `sink`.
pub fn evaluate_checkpoint(
    dir: &Path,
    cfg: Option<&ExperimentConfig>,
    episodes: u32,
    seed: u64,
    sink: impl FnMut(&echelon_core::StepRecord),
) -> Result<MetricsSummary, RunError> {
    let (cfg, mut agents) = load_set(dir, cfg)?;
    evaluate_pair(&cfg, &mut agents, episodes, seed, sink)
}

pub fn evaluate_pair(
    cfg: &ExperimentConfig,
    agents: &mut AgentPair<f32>,
    episodes: u32,
    seed: u64,
    sink: impl FnMut(&echelon_core::StepRecord),
) -> Result<MetricsSummary, RunError> {
    let setup = EvalSetup::from(&cfg.train_setup());
    let mut r = Learned { agent: &mut agents.retailer, scaling: cfg.observation, mode: ActMode::Deterministic };
    let mut f = Learned { agent: &mut agents.factory, scaling: cfg.observation, mode: ActMode::Deterministic };
    let (r, f): (&mut dyn OrderingPolicy, &mut dyn OrderingPolicy) = (&mut r, &mut f);
    evaluate(r, f, &setup, episodes, seed, sink).map_err(|source| RunError::Train { replicate: 0, source })
}
