//! Brute-force reference for tiny instances.
//!
//! The day logic here is written from the model definition on its own, in
//! integer hundredths, and does not call into `env` or `reward`. Every joint
//! action sequence of a small instance is enumerated and simulated, then
//! replayed through [`SupplyChainEnv`] and compared field by field.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::comm::{CommKind, CommScenario};
use crate::env::{ActionPair, StepRecord, SupplyChainEnv};
use crate::params::{EnvParams, HoldingBasis};
use crate::reward::{RewardScheme, SchemeKind};
use crate::rng::stream;

/// Largest number of joint action sequences an instance may have.
pub const MAX_SEQUENCES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {sequences} action sequences, limit is {limit}")]
    TooLarge { sequences: u128, limit: u64 },
    #[error("demand sequence has {got} entries for horizon {horizon}")]
    DemandLength { horizon: usize, got: usize },
    #[error("{field} = {value} is not a whole number of hundredths")]
    NotCents { field: &'static str, value: String },
    #[error("empty action set for the {0}")]
    EmptyActions(&'static str),
    #[error("environment rejected the instance: {0}")]
    Env(String),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TinyInstance {
    pub name: String,
    pub horizon: usize,
    pub retailer_orders: Vec<u32>,
    pub factory_orders: Vec<u32>,
    pub demand: Vec<u32>,
    pub params: EnvParams,
}

impl TinyInstance {
    pub fn sequences(&self) -> u128 {
        let per_day = (self.retailer_orders.len() * self.factory_orders.len()) as u128;
        per_day.saturating_pow(self.horizon as u32)
    }
}

/// The canonical suite: three instances of horizon 1 to 3.
pub fn canonical_suite() -> Vec<TinyInstance> {
    let base = EnvParams::default();
    vec![
        TinyInstance {
            name: "t1-orders-0-5-10".into(),
            horizon: 1,
            retailer_orders: vec![0, 5, 10],
            factory_orders: vec![0, 5, 10],
            demand: vec![0],
            params: base.clone(),
        },
        TinyInstance {
            name: "t2-demand-10-3".into(),
            horizon: 2,
            retailer_orders: vec![0, 5, 10, 20],
            factory_orders: vec![0, 5, 10, 20],
            demand: vec![10, 3],
            params: base.clone(),
        },
        TinyInstance {
            name: "t3-short-episode-one-stockout".into(),
            horizon: 3,
            retailer_orders: vec![0, 10, 20],
            factory_orders: vec![0, 10, 20],
            demand: vec![12, 0, 25],
            params: EnvParams { episode_length: 3, max_stockout_events: 1, initial_inventory_factory: 50, ..base },
        },
    ]
}

/// Prices in hundredths.
#[derive(Debug, Clone, Copy)]
struct Cents {
    sale: [i64; 2],
    order: [i64; 2],
    hold: [i64; 2],
    stockout: [i64; 2],
    over: [i64; 2],
}

fn cents(field: &'static str, value: f64) -> Result<i64, OracleError> {
    let scaled = value * 100.0;
    let whole = num_traits::Float::round(scaled);
    if (scaled - whole).abs() > 1e-9 {
        return Err(OracleError::NotCents { field, value: format!("{value}") });
    }
    Ok(whole as i64)
}

impl Cents {
    fn of(p: &EnvParams) -> Result<Self, OracleError> {
        Ok(Cents {
            sale: [cents("sale_price_retailer", p.sale_price_retailer)?, cents("sale_price_factory", p.sale_price_factory)?],
            order: [cents("order_cost_retailer", p.order_cost_retailer)?, cents("order_cost_factory", p.order_cost_factory)?],
            hold: [cents("holding_cost_retailer", p.holding_cost_retailer)?, cents("holding_cost_factory", p.holding_cost_factory)?],
            stockout: [cents("stockout_cost_retailer", p.stockout_cost_retailer)?, cents("stockout_cost_factory", p.stockout_cost_factory)?],
            over: [cents("backlog_cost_retailer", p.backlog_cost_retailer)?, cents("backlog_cost_factory", p.backlog_cost_factory)?],
        })
    }
}

/// One simulated day. Index 0 is the retailer, index 1 the factory; money
/// is in hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleDay {
    pub orders: [u32; 2],
    pub demand: u32,
    pub shipped: u32,
    pub inventory: [i64; 2],
    pub backlog: [i64; 2],
    pub stockout: [i64; 2],
    pub events: [u32; 2],
    pub base: [i64; 2],
    pub shaped: [i64; 2],
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleRun {
    /// The joint actions actually played; shorter than the horizon when the
    /// episode terminated early.
    pub actions: Vec<(u32, u32)>,
    pub days: Vec<OracleDay>,
    /// Undiscounted returns in hundredths under the requested scheme.
    pub returns: [i64; 2],
}

fn pos(x: i64) -> i64 {
    if x > 0 {
        x
    } else {
        0
    }
}

/// Plays one action sequence from the initial state.
fn simulate(inst: &TinyInstance, c: &Cents, scheme: &RewardScheme, seq: &[(u32, u32)]) -> Result<OracleRun, OracleError> {
    let p = &inst.params;
    let shape = [cents("shaping_coeff_retailer", scheme.shaping_coeff_retailer)?, cents("shaping_coeff_factory", scheme.shaping_coeff_factory)?];
    let capacity = [i64::from(p.capacity_retailer), i64::from(p.capacity_factory)];
    let threshold = [i64::from(p.backlog_penalty_threshold_retailer), i64::from(p.backlog_penalty_threshold_factory)];
    let mut inv = [i64::from(p.initial_inventory_retailer), i64::from(p.initial_inventory_factory)];
    let mut events = [0u32; 2];
    // Revenue lags: yesterday's customer demand and yesterday's retailer order.
    let mut lag = [0i64; 2];
    let mut run = OracleRun { actions: Vec::new(), days: Vec::new(), returns: [0; 2] };

    for (t, &(q1, q2)) in seq.iter().enumerate() {
        let d = i64::from(inst.demand[t]);
        let (q1i, q2i) = (i64::from(q1), i64::from(q2));

        let have_f = inv[1] + q2i;
        let shipped = if q1i < have_f { q1i } else { have_f };
        let short_f = q1i - shipped;
        let have_r = inv[0] + shipped;
        let sold = if d < have_r { d } else { have_r };
        let short_r = d - sold;
        let end = [have_r - sold, have_f - shipped];
        let held = match p.holding_basis {
            HoldingBasis::EndOfDay => end,
            HoldingBasis::Available => [have_r, have_f],
        };

        let r = c.sale[0] * lag[0] - c.hold[0] * held[0] - c.order[0] * q1i - c.stockout[0] * short_r - c.over[0] * pos(held[0] - threshold[0]);
        let f = c.sale[1] * lag[1] - c.hold[1] * held[1] - c.order[1] * q2i - c.stockout[1] * short_f - c.over[1] * pos(held[1] - threshold[1]);
        let shaped = [r - shape[0] * short_f, f - shape[1] * short_r];

        if short_r > 0 {
            events[0] += 1;
        }
        if short_f > 0 {
            events[1] += 1;
        }
        let terminated = events[0] > p.max_stockout_events || events[1] > p.max_stockout_events || t as u32 + 1 >= p.episode_length;

        let earned = match scheme.kind {
            SchemeKind::Baseline => [r, f],
            SchemeKind::Collaborative => shaped,
        };
        run.returns[0] += earned[0];
        run.returns[1] += earned[1];
        run.actions.push((q1, q2));
        run.days.push(OracleDay {
            orders: [q1, q2],
            demand: d as u32,
            shipped: shipped as u32,
            inventory: end,
            backlog: [pos(end[0] - capacity[0]), pos(end[1] - capacity[1])],
            stockout: [short_r, short_f],
            events,
            base: [r, f],
            shaped,
            terminated,
        });

        inv = end;
        lag = [d, q1i];
        if terminated {
            break;
        }
    }
    Ok(run)
}

fn check(inst: &TinyInstance) -> Result<Cents, OracleError> {
    let sequences = inst.sequences();
    if sequences > u128::from(MAX_SEQUENCES) {
        return Err(OracleError::TooLarge { sequences, limit: MAX_SEQUENCES });
    }
    if inst.demand.len() < inst.horizon {
        return Err(OracleError::DemandLength { horizon: inst.horizon, got: inst.demand.len() });
    }
    if inst.retailer_orders.is_empty() {
        return Err(OracleError::EmptyActions("retailer"));
    }
    if inst.factory_orders.is_empty() {
        return Err(OracleError::EmptyActions("factory"));
    }
    Cents::of(&inst.params)
}

/// All joint action sequences in lexicographic order.
fn sequences(inst: &TinyInstance) -> Vec<Vec<(u32, u32)>> {
    let joint: Vec<(u32, u32)> = inst.retailer_orders.iter().flat_map(|&r| inst.factory_orders.iter().map(move |&f| (r, f))).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..inst.horizon {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                joint.iter().map(move |&a| {
                    let mut next = prefix.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

/// Exhaustive table of returns, one row per joint action sequence.
pub fn enumerate_returns(inst: &TinyInstance, scheme: &RewardScheme) -> Result<Vec<OracleRun>, OracleError> {
    let c = check(inst)?;
    sequences(inst).iter().map(|seq| simulate(inst, &c, scheme, seq)).collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mismatch {
    pub actions: Vec<(u32, u32)>,
    pub day: usize,
    pub field: String,
    pub oracle: String,
    pub env: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossCheckReport {
    pub instance: String,
    pub scenario: CommScenario,
    pub scheme: SchemeKind,
    pub sequences: usize,
    pub steps: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

const MICROS_PER_CENT: i64 = 10_000;

fn compare(day: &OracleDay, rec: &StepRecord, out: &mut Vec<(String, String, String)>) {
    let mut eq = |field: &str, oracle: i64, env: i64| {
        if oracle != env {
            out.push((field.into(), format!("{oracle}"), format!("{env}")));
        }
    };
    eq("shipped_to_retailer", i64::from(day.shipped), i64::from(rec.shipped_to_retailer));
    eq("retailer_inventory", day.inventory[0], i64::from(rec.retailer_inventory));
    eq("factory_inventory", day.inventory[1], i64::from(rec.factory_inventory));
    eq("retailer_backlog_qty", day.backlog[0], i64::from(rec.retailer_backlog_qty));
    eq("factory_backlog_qty", day.backlog[1], i64::from(rec.factory_backlog_qty));
    eq("retailer_stockout_qty", day.stockout[0], i64::from(rec.retailer_stockout_qty));
    eq("factory_stockout_qty", day.stockout[1], i64::from(rec.factory_stockout_qty));
    eq("retailer_stockout_events", i64::from(day.events[0]), i64::from(rec.retailer_stockout_events));
    eq("factory_stockout_events", i64::from(day.events[1]), i64::from(rec.factory_stockout_events));
    eq("reward_retailer_base", day.base[0] * MICROS_PER_CENT, rec.reward_retailer_base.micros());
    eq("reward_factory_base", day.base[1] * MICROS_PER_CENT, rec.reward_factory_base.micros());
    eq("reward_retailer_shaped", day.shaped[0] * MICROS_PER_CENT, rec.reward_retailer_shaped.micros());
    eq("reward_factory_shaped", day.shaped[1] * MICROS_PER_CENT, rec.reward_factory_shaped.micros());
    eq("terminated", i64::from(day.terminated), i64::from(rec.terminated));
}

/// Replays every sequence of `inst` through the environment built from
/// `env_params` (normally `inst.params`) and lists every disagreement.
pub fn cross_check(inst: &TinyInstance, env_params: &EnvParams, scenario: CommScenario, scheme: &RewardScheme) -> Result<CrossCheckReport, OracleError> {
    let runs = enumerate_returns(inst, scheme)?;
    let mut report = CrossCheckReport { instance: inst.name.clone(), scenario, scheme: scheme.kind, sequences: runs.len(), steps: 0, mismatches: Vec::new() };
    let mut diffs = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        let mut env = SupplyChainEnv::new(env_params.clone(), scenario, *scheme, stream(i as u64, 0)).map_err(|e| OracleError::Env(format!("{e}")))?;
        for (t, (day, &(q1, q2))) in run.days.iter().zip(&run.actions).enumerate() {
            let comm_choice = (scenario == CommScenario::Mixed).then_some(CommKind::Truth);
            let rec = match env.step(ActionPair { retailer_order: q1, factory_order: q2, comm_choice }, inst.demand[t]) {
                Ok(rec) => rec,
                Err(e) => {
                    report.mismatches.push(Mismatch { actions: run.actions.clone(), day: t, field: "step".into(), oracle: "ok".into(), env: format!("{e}") });
                    break;
                }
            };
            report.steps += 1;
            diffs.clear();
            compare(day, &rec, &mut diffs);
            for (field, oracle, env) in diffs.drain(..) {
                report.mismatches.push(Mismatch { actions: run.actions.clone(), day: t, field, oracle, env });
            }
        }
    }
    Ok(report)
}

/// The canonical suite under both schemes and the three fixed scenarios.
pub fn run_canonical() -> Result<Vec<CrossCheckReport>, OracleError> {
    let mut out = Vec::new();
    for inst in canonical_suite() {
        for scheme in [RewardScheme::BASELINE, RewardScheme::COLLABORATIVE] {
            for scenario in [CommScenario::NoComms, CommScenario::Truth, CommScenario::Lying] {
                out.push(cross_check(&inst, &inst.params, scenario, &scheme)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(retailer: u32, factory: u32, demand: Vec<u32>) -> TinyInstance {
        TinyInstance {
            name: "single".into(),
            horizon: demand.len(),
            retailer_orders: vec![retailer],
            factory_orders: vec![factory],
            demand,
            params: EnvParams::default(),
        }
    }

    #[test]
    fn one_day_holding_only() {
        let runs = enumerate_returns(&single(0, 0, vec![0]), &RewardScheme::BASELINE).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].returns, [-200, -200]);
    }

    #[test]
    fn two_days_of_ten() {
        let runs = enumerate_returns(&single(10, 10, vec![10, 10]), &RewardScheme::BASELINE).unwrap();
        let day2 = runs[0].days[1];
        // Retailer: 6·10 − 0.2·10 − 6·10. Factory: 6·10 − 0.2·10 − 0.2·10.
        assert_eq!(day2.base, [-200, 5600]);
        assert_eq!(runs[0].days[0].base, [-6200, -400]);
    }

    #[test]
    fn too_large_is_rejected() {
        let inst = TinyInstance {
            name: "big".into(),
            horizon: 4,
            retailer_orders: (0..=20).collect(),
            factory_orders: (0..=20).collect(),
            demand: vec![0; 4],
            params: EnvParams::default(),
        };
        assert!(matches!(enumerate_returns(&inst, &RewardScheme::BASELINE), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn canonical_suite_agrees() {
        for report in run_canonical().unwrap() {
            assert!(report.passed(), "{}: {:?}", report.instance, report.mismatches.first());
            assert!(report.steps > 0);
        }
    }

    #[test]
    fn corrupted_holding_cost_is_caught() {
        let inst = &canonical_suite()[0];
        let bad = EnvParams { holding_cost_retailer: 0.3, ..inst.params.clone() };
        let report = cross_check(inst, &bad, CommScenario::NoComms, &RewardScheme::BASELINE).unwrap();
        assert!(!report.passed());
        let first = &report.mismatches[0];
        assert_eq!(first.day, 0);
        assert_eq!(first.field, "reward_retailer_base");
    }

    #[test]
    fn shaped_is_base_minus_cross_penalty() {
        for inst in canonical_suite() {
            let base = enumerate_returns(&inst, &RewardScheme::BASELINE).unwrap();
            let shaped = enumerate_returns(&inst, &RewardScheme::COLLABORATIVE).unwrap();
            for (b, s) in base.iter().zip(&shaped) {
                let pen_r: i64 = b.days.iter().map(|d| 1000 * d.stockout[1]).sum();
                let pen_f: i64 = b.days.iter().map(|d| 2000 * d.stockout[0]).sum();
                assert_eq!(s.returns, [b.returns[0] - pen_r, b.returns[1] - pen_f]);
            }
        }
    }

    #[test]
    fn communication_never_changes_dynamics() {
        let inst = &canonical_suite()[2];
        let trace = |scenario| {
            let mut env = SupplyChainEnv::new(inst.params.clone(), scenario, RewardScheme::COLLABORATIVE, stream(4, 2)).unwrap();
            let mut out = Vec::new();
            for t in 0..3 {
                let mut rec = env.step(ActionPair::orders(10, 0), inst.demand[t]).unwrap();
                rec.comm_kind = CommKind::NoComms;
                rec.omega = 0.0;
                rec.communicated_inventory = 0;
                let done = rec.terminated;
                out.push(rec);
                if done {
                    break;
                }
            }
            out
        };
        let none = trace(CommScenario::NoComms);
        assert_eq!(none, trace(CommScenario::Truth));
        assert_eq!(none, trace(CommScenario::Lying));
    }
}
