mod common;

use std::fs;

use echelon_lab::checkpoints::load_set;
use echelon_lab::runner::{evaluate_checkpoint, evaluate_pair, run_experiment, ReplicateMetrics, RunManifest, RunOptions};
use echelon_lab::trajectory::read_trajectory;

use common::tiny_config;

#[test]
fn same_seeds_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&tiny_config(a.path()), RunOptions::default()).unwrap();
    run_experiment(&tiny_config(b.path()), RunOptions::default()).unwrap();
    for rep in ["rep_00", "rep_01"] {
        for file in ["train.csv", "eval.csv", "metrics.json", "checkpoints/final/retailer.ckpt", "checkpoints/final/factory.ckpt"] {
            let x = fs::read(a.path().join(rep).join(file)).unwrap();
            let y = fs::read(b.path().join(rep).join(file)).unwrap();
            assert!(x == y, "{rep}/{file} differs");
        }
    }
    assert_ne!(fs::read(a.path().join("rep_00/train.csv")).unwrap(), fs::read(a.path().join("rep_01/train.csv")).unwrap());
}

#[test]
fn manifest_lists_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.replicates = 3;
    let manifest = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert_eq!(manifest, RunManifest::load(dir.path()).unwrap());
    assert_eq!(manifest.replicates.len(), 3);
    let text = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(manifest.config_sha256, echelon_lab::runner::sha256_hex(text.as_bytes()));
    for (i, rep) in manifest.replicates.iter().enumerate() {
        assert_eq!(rep.seed, 7 + i as u64);
        assert_eq!(rep.days, 120);
        for p in [&rep.train_trajectory, &rep.eval_trajectory, &rep.metrics] {
            assert!(dir.path().join(p).is_file(), "{}", p.display());
        }
        let names: Vec<String> = rep.checkpoints.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["day_000060", "final"]);
        let records = read_trajectory(&dir.path().join(&rep.train_trajectory)).unwrap();
        assert_eq!(records.len(), 120);
    }
    let summary: Vec<ReplicateMetrics> = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.len(), 3);
}

#[test]
fn sixty_days_without_early_termination_is_two_episodes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.total_days = 60;
    cfg.replicates = 1;
    cfg.env.max_stockout_events = cfg.env.episode_length;
    let manifest = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert_eq!(manifest.replicates[0].episodes, 2);
    let records = read_trajectory(&dir.path().join("rep_00/train.csv")).unwrap();
    assert_eq!(records.iter().filter(|r| r.terminated).count(), 2);
    assert!(records[..30].iter().all(|r| r.episode == records[0].episode));
    assert_ne!(records[29].episode, records[30].episode);
}

#[test]
fn checkpoint_eval_matches_in_memory_eval() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.replicates = 1;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    let summary: Vec<ReplicateMetrics> = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let final_dir = dir.path().join("rep_00/checkpoints/final");

    let from_disk = evaluate_checkpoint(&final_dir, None, cfg.eval_episodes, summary[0].seed, |_| {}).unwrap();
    assert_eq!(from_disk, summary[0].eval);

    let (cfg_back, mut agents) = load_set(&final_dir, Some(&cfg)).unwrap();
    assert_eq!(cfg_back, cfg);
    let again = evaluate_pair(&cfg, &mut agents, cfg.eval_episodes, summary[0].seed, |_| {}).unwrap();
    assert_eq!(again, from_disk);
}

#[test]
fn zero_episode_eval_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.replicates = 1;
    cfg.total_days = 30;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    let m = evaluate_checkpoint(&dir.path().join("rep_00/checkpoints/final"), None, 0, 1, |_| {}).unwrap();
    assert!(m.is_empty());
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = tiny_config(&blocker.join("sub"));
    let err = run_experiment(&cfg, RunOptions::default()).unwrap_err().to_string();
    assert!(err.contains("file"), "{err}");
}
