//! Experiment configuration files (TOML). Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use echelon_core::policy::ObsScaling;
use echelon_core::reward::{RewardScheme, SchemeKind};
use echelon_core::sac::SacConfig;
use echelon_core::training::TrainSetup;
use echelon_core::{CommScenario, DemandRegime, EnvParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand {
    High,
    Low,
}

impl Demand {
    pub const ALL: [Demand; 2] = [Demand::High, Demand::Low];

    pub fn regime(self) -> DemandRegime {
        match self {
            Demand::High => DemandRegime::HIGH,
            Demand::Low => DemandRegime::LOW,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Demand::High => "high",
            Demand::Low => "low",
        }
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Demand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "high" => Ok(Demand::High),
            "low" => Ok(Demand::Low),
            _ => Err(format!("unknown demand regime `{s}` (expected high or low)")),
        }
    }
}

/// One experiment: a single (demand, scenario, scheme) cell run over
/// several seeded replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub demand: Demand,
    pub scenario: CommScenario,
    pub scheme: SchemeKind,
    pub total_days: u64,
    pub replicates: usize,
    /// Replicate `r` uses `seed_base + r` unless `seeds` is given.
    pub seed_base: u64,
    pub seeds: Option<Vec<u64>>,
    pub eval_episodes: u32,
    /// Days between intermediate checkpoints; 0 keeps only the final one.
    pub checkpoint_interval: u64,
    pub reward_scale: f64,
    pub warmup_days: u64,
    pub out_dir: PathBuf,
    pub observation: ObsScaling,
    pub sac: SacConfig,
    pub env: EnvParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            demand: Demand::High,
            scenario: CommScenario::NoComms,
            scheme: SchemeKind::Baseline,
            total_days: 60_000,
            replicates: 10,
            seed_base: 0,
            seeds: None,
            eval_episodes: 100,
            checkpoint_interval: 10_000,
            reward_scale: 0.01,
            warmup_days: 1000,
            out_dir: PathBuf::from("runs/experiment"),
            observation: ObsScaling::default(),
            sac: SacConfig::default(),
            env: EnvParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), source: Box::new(e) })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scheme(&self) -> RewardScheme {
        RewardScheme::of(self.scheme)
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.replicates as u64).map(|r| self.seed_base + r).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.total_days < u64::from(self.env.episode_length) {
            return Err(invalid("total_days", format_args!("{} is shorter than one episode ({} days)", self.total_days, self.env.episode_length)));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.replicates {
                return Err(invalid("seeds", format_args!("{} seeds given for {} replicates", seeds.len(), self.replicates)));
            }
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid("seeds", "replicate seeds must be distinct"));
            }
        }
        if self.seeds.is_none() && self.seed_base.checked_add(self.replicates as u64).is_none() {
            return Err(invalid("seed_base", "seed range overflows"));
        }
        self.env.validate().map_err(|e| invalid("env", e))?;
        self.sac.validate().map_err(|e| invalid("sac", e))?;
        if !(self.reward_scale.is_finite() && self.reward_scale > 0.0) {
            return Err(invalid("reward_scale", "must be positive"));
        }
        if !(self.observation.quantity > 0.0 && self.observation.day > 0.0) {
            return Err(invalid("observation", "divisors must be positive"));
        }
        Ok(())
    }

    pub fn train_setup(&self) -> TrainSetup {
        TrainSetup {
            regime: self.demand.regime(),
            scenario: self.scenario,
            scheme: self.scheme(),
            env: self.env.clone(),
            sac: self.sac.clone(),
            scaling: self.observation,
            reward_scale: self.reward_scale,
            warmup_days: self.warmup_days,
        }
    }
}
