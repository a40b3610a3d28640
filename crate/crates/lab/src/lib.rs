//! Experiment plumbing around `echelon-core`: configuration files,
//! trajectory and checkpoint IO, multi-replicate runs, reports and the
//! oracle cross-check.

pub mod checkpoints;
pub mod config;
pub mod report;
pub mod runner;
pub mod trajectory;
pub mod verify;
