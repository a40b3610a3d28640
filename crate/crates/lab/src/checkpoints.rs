//! Checkpoint sets on disk: a directory holding `retailer.ckpt`,
//! `factory.ckpt` and the `config.toml` they were trained under.

use std::path::{Path, PathBuf};

use echelon_core::policy::Role;
use echelon_core::rng::{self, stream};
use echelon_core::sac::checkpoint::{AgentCheckpoint, CheckpointError};
use echelon_core::sac::SacAgent;
use echelon_core::training::AgentPair;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Error)]
pub enum CheckpointSetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: CheckpointError },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub fn agent_file(dir: &Path, role: Role) -> PathBuf {
    dir.join(format!("{}.ckpt", role.as_str()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CheckpointSetError> {
    std::fs::write(path, bytes).map_err(|source| CheckpointSetError::Io { path: path.into(), source })
}

/// Writes both agents and the config; returns the directory.
pub fn save_set(dir: &Path, agents: &AgentPair<f32>, cfg: &ExperimentConfig) -> Result<PathBuf, CheckpointSetError> {
    std::fs::create_dir_all(dir).map_err(|source| CheckpointSetError::Io { path: dir.into(), source })?;
    write(&agent_file(dir, Role::Retailer), &agents.retailer.checkpoint().encode())?;
    write(&agent_file(dir, Role::Factory), &agents.factory.checkpoint().encode())?;
    write(&dir.join(CONFIG_FILE), cfg.to_toml().as_bytes())?;
    Ok(dir.to_path_buf())
}

fn load_agent(dir: &Path, role: Role, cfg: &ExperimentConfig) -> Result<SacAgent<f32>, CheckpointSetError> {
    let path = agent_file(dir, role);
    let bytes = std::fs::read(&path).map_err(|source| CheckpointSetError::Io { path: path.clone(), source })?;
    let format = |source| CheckpointSetError::Format { path: path.clone(), source };
    let ckpt = AgentCheckpoint::<f32>::decode(&bytes).map_err(format)?;
    let stream_id = match role {
        Role::Retailer => rng::STREAM_RETAILER,
        Role::Factory => rng::STREAM_FACTORY,
    };
    SacAgent::from_checkpoint(ckpt, role.obs_dim(), role.act_dim(), cfg.sac.clone(), stream(0, stream_id)).map_err(format)
}

/// Loads a set, checking shapes and hyperparameters against `cfg`, or the
/// set's own `config.toml` when `cfg` is `None`.
pub fn load_set(dir: &Path, cfg: Option<&ExperimentConfig>) -> Result<(ExperimentConfig, AgentPair<f32>), CheckpointSetError> {
    let cfg = match cfg {
        Some(c) => c.clone(),
        None => ExperimentConfig::load(&dir.join(CONFIG_FILE))?,
    };
    let retailer = load_agent(dir, Role::Retailer, &cfg)?;
    let factory = load_agent(dir, Role::Factory, &cfg)?;
    Ok((cfg, AgentPair { retailer, factory }))
}
