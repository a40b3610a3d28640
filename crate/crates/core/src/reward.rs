//! Per-agent rewards.
//!
//! The baseline reward is each node's own profit for the day. The
//! collaborative scheme subtracts a penalty for stockouts at the *other* node;
//! `comparability_adjust` adds that penalty back so collaborative runs can be
//! tabulated next to baseline runs.

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::comm::UnknownName;
use crate::money::Money;
use crate::params::EnvParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SchemeKind {
    Baseline,
    Collaborative,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Collaborative => "collaborative",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(SchemeKind::Baseline),
            "collaborative" => Ok(SchemeKind::Collaborative),
            _ => Err(UnknownName),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RewardScheme {
    pub kind: SchemeKind,
    /// Charged to the retailer per unit of factory stockout.
    pub shaping_coeff_retailer: f64,
    /// Charged to the factory per unit of retailer stockout.
    pub shaping_coeff_factory: f64,
}

impl RewardScheme {
    pub const BASELINE: RewardScheme = RewardScheme { kind: SchemeKind::Baseline, shaping_coeff_retailer: 10.0, shaping_coeff_factory: 20.0 };
    pub const COLLABORATIVE: RewardScheme = RewardScheme { kind: SchemeKind::Collaborative, ..Self::BASELINE };

    pub fn of(kind: SchemeKind) -> Self {
        RewardScheme { kind, ..Self::BASELINE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RewardError {
    #[error("comparability adjustment only applies to collaborative-scheme rewards")]
    NotShaped,
}

fn excess(a: u32, b: u32) -> i64 {
    (a as i64 - b as i64).max(0)
}

/// Retailer profit with a single inventory figure for every term:
/// `Sp₁·D_{t−1} − Hc₁·I₁ − c₁·Q₁ − Sc₁·max(D_t − I₁, 0) − Bc₁·max(I₁ − 20, 0)`.
pub fn retailer_reward_base(prev_demand: u32, inventory: u32, order: u32, demand: u32, params: &EnvParams) -> Money {
    retailer_reward_terms(prev_demand, inventory, inventory, order, demand, params)
}

/// Retailer profit with the holding/backlog terms charged on `held` and the
/// stockout term on `available`.
pub fn retailer_reward_terms(prev_demand: u32, held: u32, available: u32, order: u32, demand: u32, params: &EnvParams) -> Money {
    let p = params.prices();
    p.sale_retailer.times(prev_demand as i64)
        - p.holding_retailer.times(held as i64)
        - p.order_retailer.times(order as i64)
        - p.stockout_retailer.times(excess(demand, available))
        - p.backlog_retailer.times(excess(held, params.backlog_penalty_threshold_retailer))
}

/// Factory profit with a single inventory figure for every term:
/// `Sp₂·Q_{1,t−1} − Hc₂·I₂ − c₂·Q₂ − Sc₂·max(Q_{1,t} − I₂, 0) − Bc₂·max(I₂ − 60, 0)`.
pub fn factory_reward_base(prev_retailer_order: u32, inventory: u32, order: u32, retailer_order: u32, params: &EnvParams) -> Money {
    factory_reward_terms(prev_retailer_order, inventory, inventory, order, retailer_order, params)
}

pub fn factory_reward_terms(prev_retailer_order: u32, held: u32, available: u32, order: u32, retailer_order: u32, params: &EnvParams) -> Money {
    let p = params.prices();
    p.sale_factory.times(prev_retailer_order as i64)
        - p.holding_factory.times(held as i64)
        - p.order_factory.times(order as i64)
        - p.stockout_factory.times(excess(retailer_order, available))
        - p.backlog_factory.times(excess(held, params.backlog_penalty_threshold_factory))
}

/// Cross-node penalties `(retailer's, factory's)` given each node's unmet
/// quantity for the day.
pub fn cross_penalties(scheme: &RewardScheme, factory_stockout: u32, retailer_stockout: u32) -> (Money, Money) {
    (
        Money::from_f64(scheme.shaping_coeff_retailer).times(factory_stockout as i64),
        Money::from_f64(scheme.shaping_coeff_factory).times(retailer_stockout as i64),
    )
}

/// Collaborative rewards `r₁ − 10·max(Q₁ − I₂, 0)` and `r₂ − 20·max(D − I₁, 0)`.
pub fn shaped_rewards(
    base_retailer: Money,
    base_factory: Money,
    retailer_order: u32,
    factory_inventory: u32,
    demand: u32,
    retailer_inventory: u32,
    scheme: &RewardScheme,
) -> (Money, Money) {
    let (pen_r, pen_f) = cross_penalties(scheme, excess(retailer_order, factory_inventory) as u32, excess(demand, retailer_inventory) as u32);
    (base_retailer - pen_r, base_factory - pen_f)
}

/// Adds back the cross-node penalty removed by shaping.
pub fn comparability_adjust(scheme: &RewardScheme, shaped: Money, opposite_stockout_penalty: Money) -> Result<Money, RewardError> {
    match scheme.kind {
        SchemeKind::Baseline => Err(RewardError::NotShaped),
        SchemeKind::Collaborative => Ok(shaped + opposite_stockout_penalty),
    }
}
