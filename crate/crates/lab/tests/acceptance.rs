//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.
//!
//! `ECHELON_ACCEPTANCE_DAYS` overrides the 20 000 training days of the two
//! reproduction criteria (8 and 9), for quick local runs.

use std::time::Instant;

use echelon_core::comm::CommScenario;
use echelon_core::demand::{DemandModel, DemandRegime};
use echelon_core::env::{ActionPair, TerminationCause};
use echelon_core::metrics::MetricsSummary;
use echelon_core::oracle::run_canonical;
use echelon_core::reward::{comparability_adjust, cross_penalties, RewardScheme, SchemeKind};
use echelon_core::rng::{stream, SimRng};
use echelon_core::sac::gradcheck::{actor_check, critic_check};
use echelon_core::sac::losses::td_targets;
use echelon_core::sac::mlp::soft_update;
use echelon_core::sac::replay::{PerParams, ReplayBuffer};
use echelon_core::sac::SacConfig;
use echelon_core::stats;
use echelon_core::training::{evaluate_agents, EvalSetup, Trainer};
use echelon_core::{CommKind, EnvParams, SupplyChainEnv};
use echelon_lab::config::{Demand, ExperimentConfig};
use echelon_lab::report::{summarize, Source};
use echelon_lab::runner::{run_experiment, RunOptions};
use echelon_lab::trajectory::read_trajectory;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Uniform random orders and, for Mixed, a uniform random disclosure kind.
fn random_actions(rng: &mut SimRng, scenario: CommScenario, order_max: u32) -> ActionPair {
    ActionPair {
        retailer_order: rng.random_range(0..=order_max),
        factory_order: rng.random_range(0..=order_max),
        comm_choice: (scenario == CommScenario::Mixed).then(|| CommKind::ALL[rng.random_range(0..3)]),
    }
}

fn oracle_equivalence() -> Outcome {
    let reports = match run_canonical() {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("oracle error: {e}")),
    };
    let steps: usize = reports.iter().map(|r| r.steps).sum();
    let mismatches: usize = reports.iter().map(|r| r.mismatches.len()).sum();
    outcome(mismatches == 0 && reports.len() == 18, format!("{} instance/scheme/scenario combinations, {steps} steps, {mismatches} mismatches", reports.len()))
}

fn reward_decomposition() -> Outcome {
    let scheme = RewardScheme::COLLABORATIVE;
    let params = EnvParams::default();
    let mut rng = stream(101, 7);
    let mut demand = DemandModel::new(DemandRegime::HIGH, stream(101, 1));
    let mut env = SupplyChainEnv::new(params.clone(), CommScenario::Mixed, scheme, stream(101, 2)).unwrap();
    let mut bad = 0usize;
    let mut penalized = 0usize;
    for _ in 0..100_000 {
        let rec = env.step(random_actions(&mut rng, CommScenario::Mixed, params.order_max), demand.sample()).unwrap();
        let (pen_r, pen_f) = cross_penalties(&scheme, rec.factory_stockout_qty, rec.retailer_stockout_qty);
        let shaped_ok = rec.reward_retailer_shaped == rec.reward_retailer_base - pen_r && rec.reward_factory_shaped == rec.reward_factory_base - pen_f;
        let adjust_ok = comparability_adjust(&scheme, rec.reward_retailer_shaped, pen_r) == Ok(rec.reward_retailer_base)
            && comparability_adjust(&scheme, rec.reward_factory_shaped, pen_f) == Ok(rec.reward_factory_base);
        bad += usize::from(!(shaped_ok && adjust_ok));
        penalized += usize::from(pen_r.micros() != 0 || pen_f.micros() != 0);
        if rec.terminated {
            env.reset();
        }
    }
    outcome(bad == 0 && penalized > 0, format!("100000 steps, {penalized} with a nonzero penalty, {bad} violations"))
}

fn communication_invariants() -> Outcome {
    let params = EnvParams::default();
    let n = 10_000;
    let mut wrong = 0usize;
    let (mut omegas, mut slots, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for scenario in [CommScenario::Truth, CommScenario::NoComms, CommScenario::Lying] {
        let mut rng = stream(202, 7);
        let mut demand = DemandModel::new(DemandRegime::LOW, stream(202, 1));
        let mut env = SupplyChainEnv::new(params.clone(), scenario, RewardScheme::BASELINE, stream(202, 2)).unwrap();
        for _ in 0..n {
            let rec = env.step(random_actions(&mut rng, scenario, params.order_max), demand.sample()).unwrap();
            match scenario {
                CommScenario::Truth => wrong += usize::from(rec.communicated_inventory != rec.factory_inventory),
                CommScenario::NoComms => wrong += usize::from(rec.communicated_inventory != 0),
                _ => {
                    wrong += usize::from(rec.communicated_inventory >= params.capacity_factory);
                    omegas.push(rec.omega);
                    slots.push(rec.communicated_inventory);
                    truth.push(f64::from(rec.factory_inventory));
                }
            }
            if rec.terminated {
                env.reset();
            }
        }
    }
    let crit = stats::ks_critical(n, 0.01);
    let ks_omega = stats::ks_statistic(&omegas, |x| x.clamp(0.0, 1.0));
    let ks_slot = stats::ks_discrete_uniform(&slots, params.capacity_factory);
    let slots_f: Vec<f64> = slots.iter().map(|&s| f64::from(s)).collect();
    let corr = stats::correlation(&slots_f, &truth);
    outcome(
        wrong == 0 && ks_omega < crit && ks_slot < crit && corr.abs() < 0.05,
        format!("{n} steps per scenario, {wrong} bad slots; Lying KS(omega) {ks_omega:.4}, KS(slot) {ks_slot:.4} vs critical {crit:.4}, corr {corr:+.4}"),
    )
}

fn demand_statistics() -> Outcome {
    const LOW_DEMAND_MEAN: f64 = 2.0064457111076903;
    let mut high = DemandModel::new(DemandRegime::HIGH, stream(303, 1));
    let xs: Vec<f64> = (0..100_000).map(|_| f64::from(high.sample())).collect();
    let (mean, var) = (stats::mean(&xs), stats::variance(&xs));
    let mut low = DemandModel::new(DemandRegime::LOW, stream(303, 1));
    let ys: Vec<f64> = (0..100_000).map(|_| f64::from(low.sample())).collect();
    let low_mean = stats::mean(&ys);
    let pass = (9.8..=10.2).contains(&mean) && (9.5..=10.5).contains(&var) && (low_mean - LOW_DEMAND_MEAN).abs() <= 0.05;
    outcome(pass, format!("Poisson mean {mean:.4} variance {var:.4}; rounded normal mean {low_mean:.4} vs {LOW_DEMAND_MEAN:.4}"))
}

fn sac_numerics() -> Outcome {
    let critic = critic_check(11, 1e-5);
    let actor = actor_check(11, 1e-5);

    let mut rng = stream(404, 0);
    let online: Vec<f64> = (0..257).map(|_| rng.random_range(-2.0..2.0)).collect();
    let start: Vec<f64> = (0..257).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut full = start.clone();
    soft_update(&mut full, &online, 1.0);
    let mut none = start.clone();
    soft_update(&mut none, &online, 0.0);
    let soft_ok = full == online && none == start;

    let rewards = [1.25f64, -3.5, 0.0];
    let targets = td_targets(&rewards, &[1.0, 1.0, 1.0], &[10.0, -7.0, 3.0], &[0.3, -1.2, 2.0], 0.99, 0.2);
    let td_ok = targets == rewards;

    let mut buf = ReplayBuffer::new(2, 1, 1, PerParams::default());
    for (i, p) in [3.0, 1.0].into_iter().enumerate() {
        buf.push(&[0.0], &[0.0], 0.0, &[0.0], false);
        buf.set_priority(i, p);
    }
    let draws = buf.sample_indices(100_000, &mut stream(404, 8)).unwrap();
    let freq = draws.iter().filter(|&&i| i == 0).count() as f64 / draws.len() as f64;
    let expected = 3f64.powf(0.6) / (3f64.powf(0.6) + 1.0);

    let pass = critic.max_rel_error < 1e-4 && actor.max_rel_error < 1e-4 && soft_ok && td_ok && (freq - expected).abs() <= 0.01;
    outcome(
        pass,
        format!(
            "critic rel err {:.2e}, actor rel err {:.2e}, soft update exact {soft_ok}, terminal target exact {td_ok}, PER freq {freq:.4} vs {expected:.4}",
            critic.max_rel_error, actor.max_rel_error
        ),
    )
}

fn tiny_config(out: &std::path::Path, scenario: CommScenario, total_days: u64) -> ExperimentConfig {
    ExperimentConfig {
        demand: Demand::Low,
        scenario,
        scheme: SchemeKind::Collaborative,
        total_days,
        replicates: 2,
        eval_episodes: 5,
        checkpoint_interval: 0,
        warmup_days: 100,
        out_dir: out.to_path_buf(),
        sac: SacConfig { hidden: vec![32, 32], batch_size: 32, min_fill: 64, ..SacConfig::default() },
        ..ExperimentConfig::default()
    }
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        if let Err(e) = run_experiment(&tiny_config(dir.path(), CommScenario::Mixed, 600), RunOptions::default()) {
            return outcome(false, format!("run failed: {e}"));
        }
    }
    let mut compared = 0;
    for rep in ["rep_00", "rep_01"] {
        for file in ["train.csv", "eval.csv"] {
            let x = std::fs::read(a.path().join(rep).join(file)).unwrap();
            let y = std::fs::read(b.path().join(rep).join(file)).unwrap();
            if x != y {
                return outcome(false, format!("{rep}/{file} differs between runs"));
            }
            compared += 1;
        }
    }
    outcome(true, format!("{compared} trajectory files byte-identical across two runs"))
}

fn termination() -> Outcome {
    let params = EnvParams::default();
    let limit = params.max_stockout_events + 1;
    let mut rng = stream(505, 7);
    let (mut longest, mut early, mut bad) = (0u32, 0usize, 0usize);
    for (regime, seed) in [(DemandRegime::HIGH, 0u64), (DemandRegime::LOW, 1)] {
        let mut demand = DemandModel::new(regime, stream(505 + seed, 1));
        let mut env = SupplyChainEnv::new(params.clone(), CommScenario::Mixed, RewardScheme::BASELINE, stream(505 + seed, 2)).unwrap();
        for _ in 0..5_000 {
            let mut days = 0;
            loop {
                let rec = env.step(random_actions(&mut rng, CommScenario::Mixed, params.order_max), demand.sample()).unwrap();
                days += 1;
                if !rec.terminated {
                    continue;
                }
                let events = match rec.termination_cause {
                    TerminationCause::RetailerStockouts => Some(rec.retailer_stockout_events),
                    TerminationCause::FactoryStockouts => Some(rec.factory_stockout_events),
                    _ => None,
                };
                if days < params.episode_length {
                    early += 1;
                    bad += usize::from(events != Some(limit));
                } else if let Some(e) = events {
                    bad += usize::from(e != limit);
                }
                break;
            }
            longest = longest.max(days);
            env.reset();
        }
    }
    outcome(
        longest <= 30 && bad == 0,
        format!("10000 episodes, longest {longest} days, {early} early terminations, {bad} without exactly {limit} stockout events"),
    )
}

fn mixed_accounting() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    if let Err(e) = run_experiment(&tiny_config(dir.path(), CommScenario::Mixed, 2_000), RunOptions::default()) {
        return outcome(false, format!("run failed: {e}"));
    }
    let mut steps = 0;
    for rep in ["rep_00", "rep_01"] {
        match read_trajectory(&dir.path().join(rep).join("train.csv")) {
            Ok(records) => steps += records.len(),
            Err(e) => return outcome(false, format!("{e}")),
        }
    }
    let mut worst: f64 = 0.0;
    for source in [Source::Eval, Source::Train { tail_episodes: usize::MAX }] {
        let summary = match summarize(dir.path(), source) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("{e}")),
        };
        for c in &summary.cells {
            let total: f64 = c.kind_percent.iter().map(|(_, p)| p.mean).sum();
            worst = worst.max((total - 100.0).abs());
        }
    }
    let shares: Vec<String> = summarize(dir.path(), Source::Train { tail_episodes: usize::MAX }).unwrap().cells[0]
        .kind_percent
        .iter()
        .map(|(k, p)| format!("{k} {:.2}%", p.mean))
        .collect();
    outcome(worst <= 0.01, format!("{steps} training steps parsed as valid kinds; {}; max deviation from 100%: {worst:.2e}", shares.join(", ")))
}

fn training_days() -> u64 {
    std::env::var("ECHELON_ACCEPTANCE_DAYS").ok().and_then(|v| v.parse().ok()).unwrap_or(20_000)
}

const SEEDS: [u64; 3] = [0, 1, 2];

/// Trains one cell for one seed and evaluates it deterministically.
fn train_and_eval(demand: Demand, scheme: SchemeKind, scenario: CommScenario, seed: u64, days: u64) -> MetricsSummary {
    let cfg = ExperimentConfig { demand, scheme, scenario, total_days: days, ..ExperimentConfig::default() };
    let setup = cfg.train_setup();
    let started = Instant::now();
    let mut trainer = Trainer::<f32>::new(setup.clone(), seed).expect("valid setup");
    trainer.run(days, |_| {}).expect("training step");
    let mut agents = trainer.into_agents();
    let m = evaluate_agents(&mut agents, cfg.observation, &EvalSetup::from(&setup), cfg.eval_episodes, seed, |_| {}).expect("evaluation");
    println!(
        "  {demand}/{scheme}/{} seed {seed}: global {:.2}, factory {:.2}, retailer {:.2} per 30 days ({:.0} s)",
        scenario.as_str(),
        reported(&m, scheme).0,
        reported(&m, scheme).1,
        reported(&m, scheme).2,
        started.elapsed().as_secs_f64()
    );
    m
}

/// `(global, factory, retailer)` per 30 days, comparability-adjusted under
/// the collaborative scheme.
fn reported(m: &MetricsSummary, scheme: SchemeKind) -> (f64, f64, f64) {
    match scheme {
        SchemeKind::Baseline => (m.global.base.per_30_days, m.factory.base.per_30_days, m.retailer.base.per_30_days),
        SchemeKind::Collaborative => (m.global.adjusted.per_30_days, m.factory.adjusted.per_30_days, m.retailer.adjusted.per_30_days),
    }
}

fn medians(demand: Demand, scheme: SchemeKind, scenario: CommScenario, days: u64) -> (f64, f64) {
    let runs: Vec<(f64, f64, f64)> = SEEDS.iter().map(|&s| reported(&train_and_eval(demand, scheme, scenario, s, days), scheme)).collect();
    let global: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let factory: Vec<f64> = runs.iter().map(|r| r.1).collect();
    (stats::median(&global), stats::median(&factory))
}

fn low_demand_ordering() -> Outcome {
    let days = training_days();
    let (truth_g, truth_f) = medians(Demand::Low, SchemeKind::Collaborative, CommScenario::Truth, days);
    let (lying_g, lying_f) = medians(Demand::Low, SchemeKind::Collaborative, CommScenario::Lying, days);
    outcome(
        truth_g > lying_g && truth_f > lying_f,
        format!("{days} days x 3 seeds; median global Truth {truth_g:.2} vs Lying {lying_g:.2}; median factory Truth {truth_f:.2} vs Lying {lying_f:.2}"),
    )
}

fn high_demand_insensitivity() -> Outcome {
    let days = training_days();
    let globals: Vec<(CommScenario, f64)> = CommScenario::ALL.iter().map(|&s| (s, medians(Demand::High, SchemeKind::Baseline, s, days).0)).collect();
    let values: Vec<f64> = globals.iter().map(|g| g.1).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    let scale = stats::median(&values.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let listed: Vec<String> = globals.iter().map(|(s, g)| format!("{} {g:.2}", s.label())).collect();
    outcome(
        spread < 0.15 * scale,
        format!(
            "{days} days x 3 seeds; median global {}; spread {spread:.2} = {:.1}% of median |global| {scale:.2}",
            listed.join(", "),
            100.0 * spread / scale
        ),
    )
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "reward decomposition", reward_decomposition),
        (3, "communication invariants", communication_invariants),
        (4, "demand statistics", demand_statistics),
        (5, "SAC numerics", sac_numerics),
        (6, "determinism", determinism),
        (7, "termination", termination),
        (10, "mixed-strategy accounting", mixed_accounting),
        (8, "low-demand collaborative ordering", low_demand_ordering),
        (9, "high-demand insensitivity", high_demand_insensitivity),
    ];
    let mut results = Vec::new();
    for (id, name, run) in criteria {
        let started = Instant::now();
        let o = run();
        let line = format!("criterion {id:>2} {}: {name}: {} ({:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, started.elapsed().as_secs_f64());
        println!("{line}");
        results.push((id, o.pass, line));
    }
    results.sort_by_key(|r| r.0);
    println!("\nacceptance summary");
    for (_, _, line) in &results {
        println!("{line}");
    }
    let failed = results.iter().filter(|r| !r.1).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
