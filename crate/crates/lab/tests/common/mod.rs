#![allow(dead_code)]

use std::path::Path;

use echelon_core::reward::SchemeKind;
use echelon_core::sac::SacConfig;
use echelon_core::CommScenario;
use echelon_lab::config::{Demand, ExperimentConfig};

/// A config small enough to train in well under a second per replicate.
pub fn tiny_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        demand: Demand::Low,
        scenario: CommScenario::Mixed,
        scheme: SchemeKind::Collaborative,
        total_days: 120,
        replicates: 2,
        seed_base: 7,
        eval_episodes: 3,
        checkpoint_interval: 60,
        warmup_days: 40,
        out_dir: out.to_path_buf(),
        sac: SacConfig { hidden: vec![16, 16], batch_size: 16, min_fill: 32, replay_capacity: 500, ..SacConfig::default() },
        ..ExperimentConfig::default()
    }
}
