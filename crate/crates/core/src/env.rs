//! The two-echelon supply-chain MDP.
//!
//! Within a day events happen in a fixed order with zero lead time:
//!
//! 1. the factory receives its own order in full from an unlimited supplier;
//! 2. the factory ships `min(Q₁, I₂ + Q₂)` to the retailer, the shortfall is
//!    the factory's stockout;
//! 3. customer demand arrives and the retailer sells `min(D, I₁ + shipped)`,
//!    the shortfall is lost and counted as the retailer's stockout;
//! 4. end-of-day stock is what remains, backlog is stock above capacity;
//! 5. stockout events are counted, the day advances and termination is
//!    checked (day limit, or more than the allowed number of stockout days
//!    at either node).
//!
//! Rewards for the day are computed from exactly these quantities, and the
//! factory's disclosure for the retailer's next observation is drawn last.

use core::fmt;

use thiserror::Error;

use crate::comm::{self, CommKind, CommScenario, Disclosure, Observation};
use crate::money::Money;
use crate::params::{EnvParams, HoldingBasis, ParamError};
use crate::reward::{self, RewardScheme};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AgentState {
    pub inventory: u32,
    pub backlog: u32,
    /// Unmet quantity on the most recent day.
    pub stockout_level: u32,
    /// Demand seen on the most recent day (customer demand for the retailer,
    /// the retailer's order for the factory).
    pub last_demand: u32,
    /// Days with a stockout so far in this episode.
    pub stockout_events: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub retailer: AgentState,
    pub factory: AgentState,
    pub day: u32,
    pub episode: u32,
    /// Yesterday's retailer order, the factory's revenue basis today.
    pub last_retailer_order: u32,
    /// Yesterday's customer demand, the retailer's revenue basis today.
    pub last_customer_demand: u32,
    /// Factory inventory as last disclosed to the retailer.
    pub communicated: u32,
    pub terminated: bool,
}

impl EnvState {
    pub fn initial(params: &EnvParams, episode: u32) -> Self {
        let agent = |inventory: u32, capacity: u32| AgentState { inventory, backlog: inventory.saturating_sub(capacity), ..AgentState::default() };
        EnvState {
            retailer: agent(params.initial_inventory_retailer, params.capacity_retailer),
            factory: agent(params.initial_inventory_factory, params.capacity_factory),
            day: 0,
            episode,
            last_retailer_order: 0,
            last_customer_demand: 0,
            communicated: 0,
            terminated: false,
        }
    }
}

/// Both agents' decisions for one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionPair {
    pub retailer_order: u32,
    pub factory_order: u32,
    /// The factory's disclosure choice. Required in the mixed scenario and
    /// ignored otherwise.
    pub comm_choice: Option<CommKind>,
}

impl ActionPair {
    pub fn orders(retailer_order: u32, factory_order: u32) -> Self {
        ActionPair { retailer_order, factory_order, comm_choice: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TerminationCause {
    None,
    DaysExhausted,
    RetailerStockouts,
    FactoryStockouts,
}

impl TerminationCause {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationCause::None => "none",
            TerminationCause::DaysExhausted => "days_exhausted",
            TerminationCause::RetailerStockouts => "retailer_stockouts",
            TerminationCause::FactoryStockouts => "factory_stockouts",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => TerminationCause::None,
            "days_exhausted" => TerminationCause::DaysExhausted,
            "retailer_stockouts" => TerminationCause::RetailerStockouts,
            "factory_stockouts" => TerminationCause::FactoryStockouts,
            _ => return None,
        })
    }
}

impl fmt::Display for TerminationCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: u32,
    /// Day index within the episode before the step, `0..episode_length`.
    pub day: u32,
    pub retailer_order: u32,
    pub factory_order: u32,
    pub comm_kind: CommKind,
    pub omega: f64,
    pub communicated_inventory: u32,
    pub customer_demand: u32,
    pub shipped_to_retailer: u32,
    pub retailer_inventory: u32,
    pub factory_inventory: u32,
    pub retailer_stockout_qty: u32,
    pub factory_stockout_qty: u32,
    pub retailer_backlog_qty: u32,
    pub factory_backlog_qty: u32,
    pub retailer_stockout_events: u32,
    pub factory_stockout_events: u32,
    pub reward_retailer_base: Money,
    pub reward_factory_base: Money,
    pub reward_retailer_shaped: Money,
    pub reward_factory_shaped: Money,
    pub terminated: bool,
    pub termination_cause: TerminationCause,
}

impl StepRecord {
    /// `(retailer, factory)` penalty removed by shaping.
    pub fn cross_penalties(&self) -> (Money, Money) {
        (self.reward_retailer_base - self.reward_retailer_shaped, self.reward_factory_base - self.reward_factory_shaped)
    }

    /// The rewards the agents are trained on under `scheme`.
    pub fn scheme_rewards(&self, scheme: &RewardScheme) -> (Money, Money) {
        match scheme.kind {
            reward::SchemeKind::Baseline => (self.reward_retailer_base, self.reward_factory_base),
            reward::SchemeKind::Collaborative => (self.reward_retailer_shaped, self.reward_factory_shaped),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("episode already terminated; reset before stepping")]
    Terminated,
    #[error("{agent} order {order} outside [0, {max}]")]
    OrderOutOfRange { agent: &'static str, order: u32, max: u32 },
    #[error("mixed scenario requires the factory to choose a disclosure kind")]
    MissingCommChoice,
}

/// A single environment instance.
pub struct SupplyChainEnv {
    params: EnvParams,
    scenario: CommScenario,
    scheme: RewardScheme,
    rng: SimRng,
    state: EnvState,
}

impl SupplyChainEnv {
    /// Validates `params` and places the environment at the start of
    /// episode 0. `rng` drives the lying disclosure.
    pub fn new(params: EnvParams, scenario: CommScenario, scheme: RewardScheme, rng: SimRng) -> Result<Self, ParamError> {
        params.validate()?;
        let state = EnvState::initial(&params, 0);
        let mut env = SupplyChainEnv { params, scenario, scheme, rng, state };
        env.state.communicated = env.opening_disclosure().communicated;
        Ok(env)
    }

    /// Starts the next episode. Random streams carry on.
    pub fn reset(&mut self) -> &EnvState {
        self.state = EnvState::initial(&self.params, self.state.episode + 1);
        self.state.communicated = self.opening_disclosure().communicated;
        &self.state
    }

    // Before the factory has acted, a fixed scenario discloses as usual and
    // the mixed scenario discloses nothing.
    fn opening_disclosure(&mut self) -> Disclosure {
        let kind = self.scenario.fixed_kind().unwrap_or(CommKind::NoComms);
        comm::communicate(kind, self.state.factory.inventory, self.params.capacity_factory, &mut self.rng)
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn scenario(&self) -> CommScenario {
        self.scenario
    }

    pub fn scheme(&self) -> &RewardScheme {
        &self.scheme
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn retailer_observation(&self) -> Observation {
        comm::build_retailer_observation(&self.state, self.state.communicated)
    }

    pub fn factory_observation(&self) -> Observation {
        comm::build_factory_observation(&self.state)
    }

    pub fn step(&mut self, actions: ActionPair, demand: u32) -> Result<StepRecord, StepError> {
        if self.state.terminated {
            return Err(StepError::Terminated);
        }
        let max = self.params.order_max;
        if actions.retailer_order > max {
            return Err(StepError::OrderOutOfRange { agent: "retailer", order: actions.retailer_order, max });
        }
        if actions.factory_order > max {
            return Err(StepError::OrderOutOfRange { agent: "factory", order: actions.factory_order, max });
        }
        let kind = match self.scenario.fixed_kind() {
            Some(kind) => kind,
            None => actions.comm_choice.ok_or(StepError::MissingCommChoice)?,
        };

        let p = &self.params;
        let s = &self.state;
        let q1 = actions.retailer_order;
        let q2 = actions.factory_order;

        let factory_available = s.factory.inventory + q2;
        let shipped = q1.min(factory_available);
        let factory_stockout = q1 - shipped;

        let retailer_available = s.retailer.inventory + shipped;
        let sold = demand.min(retailer_available);
        let retailer_stockout = demand - sold;

        let retailer_end = retailer_available - sold;
        let factory_end = factory_available - shipped;

        let (retailer_held, factory_held) = match p.holding_basis {
            HoldingBasis::EndOfDay => (retailer_end, factory_end),
            HoldingBasis::Available => (retailer_available, factory_available),
        };
        let base_r = reward::retailer_reward_terms(s.last_customer_demand, retailer_held, retailer_available, q1, demand, p);
        let base_f = reward::factory_reward_terms(s.last_retailer_order, factory_held, factory_available, q2, q1, p);
        let (pen_r, pen_f) = reward::cross_penalties(&self.scheme, factory_stockout, retailer_stockout);

        let retailer = AgentState {
            inventory: retailer_end,
            backlog: retailer_end.saturating_sub(p.capacity_retailer),
            stockout_level: retailer_stockout,
            last_demand: demand,
            stockout_events: s.retailer.stockout_events + u32::from(retailer_stockout > 0),
        };
        let factory = AgentState {
            inventory: factory_end,
            backlog: factory_end.saturating_sub(p.capacity_factory),
            stockout_level: factory_stockout,
            last_demand: q1,
            stockout_events: s.factory.stockout_events + u32::from(factory_stockout > 0),
        };
        let day = s.day;
        let next_day = day + 1;
        let cause = if retailer.stockout_events > p.max_stockout_events {
            TerminationCause::RetailerStockouts
        } else if factory.stockout_events > p.max_stockout_events {
            TerminationCause::FactoryStockouts
        } else if next_day >= p.episode_length {
            TerminationCause::DaysExhausted
        } else {
            TerminationCause::None
        };
        let terminated = cause != TerminationCause::None;

        let disclosure = comm::communicate(kind, factory_end, p.capacity_factory, &mut self.rng);

        let record = StepRecord {
            episode: s.episode,
            day,
            retailer_order: q1,
            factory_order: q2,
            comm_kind: kind,
            omega: disclosure.omega,
            communicated_inventory: disclosure.communicated,
            customer_demand: demand,
            shipped_to_retailer: shipped,
            retailer_inventory: retailer_end,
            factory_inventory: factory_end,
            retailer_stockout_qty: retailer_stockout,
            factory_stockout_qty: factory_stockout,
            retailer_backlog_qty: retailer.backlog,
            factory_backlog_qty: factory.backlog,
            retailer_stockout_events: retailer.stockout_events,
            factory_stockout_events: factory.stockout_events,
            reward_retailer_base: base_r,
            reward_factory_base: base_f,
            reward_retailer_shaped: base_r - pen_r,
            reward_factory_shaped: base_f - pen_f,
            terminated,
            termination_cause: cause,
        };

        self.state = EnvState {
            retailer,
            factory,
            day: next_day,
            episode: s.episode,
            last_retailer_order: q1,
            last_customer_demand: demand,
            communicated: disclosure.communicated,
            terminated,
        };
        Ok(record)
    }
}
