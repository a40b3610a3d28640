//! Per-episode accounting over step records.

use alloc::vec::Vec;

use crate::comm::CommKind;
use crate::env::StepRecord;
use crate::money::Money;
use crate::reward::{self, RewardScheme, SchemeKind};

/// Sums for one agent over one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentTotals {
    pub base: Money,
    pub shaped: Money,
    /// The base reward recovered from the shaped one; equals `base` under
    /// the baseline scheme.
    pub adjusted: Money,
    pub inventory: u64,
    pub stockout_days: u64,
    pub stockout_units: u64,
    pub backlog_days: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeTotals {
    pub episode: u32,
    pub days: u32,
    pub retailer: AgentTotals,
    pub factory: AgentTotals,
    /// Days with each disclosure kind, indexed by [`CommKind::index`].
    pub kinds: [u64; 3],
}

impl EpisodeTotals {
    fn new(episode: u32) -> Self {
        EpisodeTotals { episode, days: 0, retailer: AgentTotals::default(), factory: AgentTotals::default(), kinds: [0; 3] }
    }

    pub fn global_base(&self) -> Money {
        self.retailer.base + self.factory.base
    }

    pub fn global_shaped(&self) -> Money {
        self.retailer.shaped + self.factory.shaped
    }
}

/// Folds step records into episode totals. Records must arrive in order;
/// a change of episode number starts a new episode.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    scheme: RewardScheme,
    episodes: Vec<EpisodeTotals>,
}

#[allow(clippy::too_many_arguments)]
fn add(t: &mut AgentTotals, base: Money, shaped: Money, penalty: Money, scheme: &RewardScheme, inventory: u32, stockout: u32, backlog: u32) {
    t.base += base;
    t.shaped += shaped;
    t.adjusted += match scheme.kind {
        SchemeKind::Baseline => base,
        SchemeKind::Collaborative => reward::comparability_adjust(scheme, shaped, penalty).expect("collaborative scheme"),
    };
    t.inventory += u64::from(inventory);
    t.stockout_days += u64::from(stockout > 0);
    t.stockout_units += u64::from(stockout);
    t.backlog_days += u64::from(backlog > 0);
}

impl MetricsAccumulator {
    pub fn new(scheme: RewardScheme) -> Self {
        MetricsAccumulator { scheme, episodes: Vec::new() }
    }

    pub fn push(&mut self, rec: &StepRecord) {
        if self.episodes.last().is_none_or(|e| e.episode != rec.episode) {
            self.episodes.push(EpisodeTotals::new(rec.episode));
        }
        let scheme = self.scheme;
        let e = self.episodes.last_mut().expect("episode just pushed");
        let (pen_r, pen_f) = rec.cross_penalties();
        e.days += 1;
        e.kinds[rec.comm_kind.index()] += 1;
        add(
            &mut e.retailer,
            rec.reward_retailer_base,
            rec.reward_retailer_shaped,
            pen_r,
            &scheme,
            rec.retailer_inventory,
            rec.retailer_stockout_qty,
            rec.retailer_backlog_qty,
        );
        add(
            &mut e.factory,
            rec.reward_factory_base,
            rec.reward_factory_shaped,
            pen_f,
            &scheme,
            rec.factory_inventory,
            rec.factory_stockout_qty,
            rec.factory_backlog_qty,
        );
    }

    pub fn episodes(&self) -> &[EpisodeTotals] {
        &self.episodes
    }

    pub fn summary(&self) -> MetricsSummary {
        MetricsSummary::from_episodes(&self.episodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RewardStats {
    /// Mean over episodes of the episode sum.
    pub per_episode: f64,
    pub per_day: f64,
    /// `per_day` scaled to a full 30-day episode.
    pub per_30_days: f64,
}

impl RewardStats {
    fn of(episode_sums: impl Iterator<Item = Money>, episodes: usize, days: u64) -> Self {
        if episodes == 0 || days == 0 {
            return RewardStats::default();
        }
        let total: Money = episode_sums.sum();
        let per_day = total.to_f64() / days as f64;
        RewardStats { per_episode: total.to_f64() / episodes as f64, per_day, per_30_days: per_day * 30.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentSummary {
    pub base: RewardStats,
    pub shaped: RewardStats,
    pub adjusted: RewardStats,
    pub mean_inventory: f64,
    /// Fraction of days with unmet quantity.
    pub stockout_rate: f64,
    /// Fraction of days with stock above capacity.
    pub backlog_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsSummary {
    pub episodes: usize,
    pub days: u64,
    pub retailer: AgentSummary,
    pub factory: AgentSummary,
    pub global: AgentSummary,
    /// Share of days per disclosure kind, in [`CommKind::ALL`] order. Empty
    /// when no days were recorded.
    pub kind_share: Vec<(CommKind, f64)>,
}

impl MetricsSummary {
    pub fn from_episodes(episodes: &[EpisodeTotals]) -> Self {
        let n = episodes.len();
        let days: u64 = episodes.iter().map(|e| u64::from(e.days)).sum();
        let agent = |pick: &dyn Fn(&EpisodeTotals) -> AgentTotals| {
            if days == 0 {
                return AgentSummary::default();
            }
            let totals: Vec<AgentTotals> = episodes.iter().map(pick).collect();
            let sum = |f: &dyn Fn(&AgentTotals) -> u64| totals.iter().map(f).sum::<u64>() as f64 / days as f64;
            AgentSummary {
                base: RewardStats::of(totals.iter().map(|t| t.base), n, days),
                shaped: RewardStats::of(totals.iter().map(|t| t.shaped), n, days),
                adjusted: RewardStats::of(totals.iter().map(|t| t.adjusted), n, days),
                mean_inventory: sum(&|t| t.inventory),
                stockout_rate: sum(&|t| t.stockout_days),
                backlog_rate: sum(&|t| t.backlog_days),
            }
        };
        let retailer = agent(&|e| e.retailer);
        let factory = agent(&|e| e.factory);
        let global = agent(&|e| AgentTotals {
            base: e.retailer.base + e.factory.base,
            shaped: e.retailer.shaped + e.factory.shaped,
            adjusted: e.retailer.adjusted + e.factory.adjusted,
            inventory: e.retailer.inventory + e.factory.inventory,
            stockout_days: e.retailer.stockout_days + e.factory.stockout_days,
            stockout_units: e.retailer.stockout_units + e.factory.stockout_units,
            backlog_days: e.retailer.backlog_days + e.factory.backlog_days,
        });
        let kind_share = if days == 0 {
            Vec::new()
        } else {
            CommKind::ALL.iter().map(|&k| (k, episodes.iter().map(|e| e.kinds[k.index()]).sum::<u64>() as f64 / days as f64)).collect()
        };
        MetricsSummary { episodes: n, days, retailer, factory, global, kind_share }
    }

    pub fn is_empty(&self) -> bool {
        self.days == 0
    }
}
