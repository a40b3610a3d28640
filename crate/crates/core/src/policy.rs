//! Decoding raw actions into orders, observation features, and scripted
//! stand-in policies.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use rand::Rng;

use crate::comm::{CommKind, CommScenario, Observation, UnknownName};
use crate::env::ActionPair;
use crate::rng::SimRng;
use crate::sac::{ActMode, Real, SacAgent, SacError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Retailer,
    Factory,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Retailer, Role::Factory];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Retailer => "retailer",
            Role::Factory => "factory",
        }
    }

    pub fn obs_dim(self) -> usize {
        match self {
            Role::Retailer => Observation::RETAILER_WIDTH,
            Role::Factory => Observation::FACTORY_WIDTH,
        }
    }

    /// The factory always emits a second dimension; outside the mixed
    /// scenario it is ignored.
    pub fn act_dim(self) -> usize {
        match self {
            Role::Retailer => 1,
            Role::Factory => 2,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "retailer" => Ok(Role::Retailer),
            "factory" => Ok(Role::Factory),
            _ => Err(UnknownName),
        }
    }
}

/// `round(raw · order_max)` with `raw` clamped to `[0, 1]`.
pub fn decode_order(raw: f64, order_max: u32) -> u32 {
    let raw = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
    Float::round(raw * order_max as f64) as u32
}

/// Thirds of `[0, 1]`: NoComms, then Lying, then Truth.
pub fn decode_comm(raw: f64) -> CommKind {
    if raw < 1.0 / 3.0 {
        CommKind::NoComms
    } else if raw < 2.0 / 3.0 {
        CommKind::Lying
    } else {
        CommKind::Truth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub order: u32,
    pub comm_choice: Option<CommKind>,
}

pub fn decode_action(raw: &[f64], role: Role, scenario: CommScenario, order_max: u32) -> Decoded {
    let order = decode_order(raw.first().copied().unwrap_or(0.0), order_max);
    let comm_choice = match (role, scenario) {
        (Role::Factory, CommScenario::Mixed) => Some(decode_comm(raw.get(1).copied().unwrap_or(0.0))),
        _ => None,
    };
    Decoded { order, comm_choice }
}

pub fn joint_action(retailer_raw: &[f64], factory_raw: &[f64], scenario: CommScenario, order_max: u32) -> ActionPair {
    let r = decode_action(retailer_raw, Role::Retailer, scenario, order_max);
    let f = decode_action(factory_raw, Role::Factory, scenario, order_max);
    ActionPair { retailer_order: r.order, factory_order: f.order, comm_choice: f.comm_choice }
}

/// Divisors applied to observation slots before they reach a network.
/// Every slot but the last is a quantity; the last is the day index.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ObsScaling {
    pub quantity: f64,
    pub day: f64,
}

impl Default for ObsScaling {
    fn default() -> Self {
        ObsScaling { quantity: 20.0, day: 30.0 }
    }
}

impl ObsScaling {
    pub const IDENTITY: ObsScaling = ObsScaling { quantity: 1.0, day: 1.0 };

    pub fn features(&self, obs: &Observation) -> Vec<f64> {
        let slots = obs.slots();
        let last = slots.len().saturating_sub(1);
        slots.iter().enumerate().map(|(i, &v)| v as f64 / if i == last { self.day } else { self.quantity }).collect()
    }
}

/// Anything that maps an observation to a raw action in `[0,1]^d`.
pub trait OrderingPolicy {
    fn act(&mut self, obs: &Observation) -> Result<Vec<f64>, SacError>;
}

/// Orders the same quantity every day. The factory variant also fixes its
/// disclosure dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantOrder {
    raw: Vec<f64>,
}

impl ConstantOrder {
    pub fn retailer(order: u32, order_max: u32) -> Self {
        ConstantOrder { raw: vec![order as f64 / order_max as f64] }
    }

    pub fn factory(order: u32, order_max: u32, comm_raw: f64) -> Self {
        ConstantOrder { raw: vec![order as f64 / order_max as f64, comm_raw] }
    }
}

impl OrderingPolicy for ConstantOrder {
    fn act(&mut self, _obs: &Observation) -> Result<Vec<f64>, SacError> {
        Ok(self.raw.clone())
    }
}

/// Orders up to `target` from the on-hand inventory in slot 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStock {
    pub target: u32,
    pub order_max: u32,
    pub act_dim: usize,
}

impl OrderingPolicy for BaseStock {
    fn act(&mut self, obs: &Observation) -> Result<Vec<f64>, SacError> {
        let on_hand = obs.slots().first().copied().unwrap_or(0);
        let order = self.target.saturating_sub(on_hand).min(self.order_max);
        let mut raw = vec![0.0; self.act_dim.max(1)];
        raw[0] = order as f64 / self.order_max as f64;
        Ok(raw)
    }
}

/// Uniform raw actions from a private stream.
pub struct UniformRandom {
    pub act_dim: usize,
    pub rng: SimRng,
}

impl OrderingPolicy for UniformRandom {
    fn act(&mut self, _obs: &Observation) -> Result<Vec<f64>, SacError> {
        Ok((0..self.act_dim).map(|_| self.rng.random::<f64>()).collect())
    }
}

/// A learned agent acting on scaled features.
pub struct Learned<'a, T> {
    pub agent: &'a mut SacAgent<T>,
    pub scaling: ObsScaling,
    pub mode: ActMode,
}

impl<T: Real> OrderingPolicy for Learned<'_, T> {
    fn act(&mut self, obs: &Observation) -> Result<Vec<f64>, SacError> {
        self.agent.act(&self.scaling.features(obs), self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        assert_eq!(decode_action(&[0.5], Role::Retailer, CommScenario::NoComms, 20), Decoded { order: 10, comm_choice: None });
        assert_eq!(decode_action(&[1.0, 0.1], Role::Factory, CommScenario::Mixed, 20), Decoded { order: 20, comm_choice: Some(CommKind::NoComms) });
        assert_eq!(decode_action(&[0.0, 0.9], Role::Factory, CommScenario::Truth, 20), Decoded { order: 0, comm_choice: None });
    }

    #[test]
    fn order_rounding_and_clamp() {
        assert_eq!(decode_order(0.024, 20), 0);
        assert_eq!(decode_order(0.025, 20), 1);
        assert_eq!(decode_order(0.975, 20), 20);
        assert_eq!(decode_order(-0.3, 20), 0);
        assert_eq!(decode_order(7.0, 20), 20);
        assert_eq!(decode_order(f64::NAN, 20), 0);
    }

    #[test]
    fn comm_thirds() {
        assert_eq!(decode_comm(0.0), CommKind::NoComms);
        assert_eq!(decode_comm(0.333), CommKind::NoComms);
        assert_eq!(decode_comm(0.34), CommKind::Lying);
        assert_eq!(decode_comm(0.666), CommKind::Lying);
        assert_eq!(decode_comm(0.67), CommKind::Truth);
        assert_eq!(decode_comm(1.0), CommKind::Truth);
    }

    #[test]
    fn features_scale_quantities_and_day() {
        let obs = Observation::new(vec![10, 0, 2, 4, 15]);
        assert_eq!(ObsScaling::default().features(&obs), [0.5, 0.0, 0.1, 0.2, 0.5]);
        assert_eq!(ObsScaling::IDENTITY.features(&obs), [10.0, 0.0, 2.0, 4.0, 15.0]);
    }

    #[test]
    fn base_stock_orders_up_to_target() {
        let mut p = BaseStock { target: 15, order_max: 20, act_dim: 1 };
        assert_eq!(p.act(&Observation::new(vec![4, 0, 0, 0, 0, 0])).unwrap(), [11.0 / 20.0]);
        assert_eq!(p.act(&Observation::new(vec![30, 0, 0, 0, 0, 0])).unwrap(), [0.0]);
        let raw = p.act(&Observation::new(vec![4, 0, 0, 0, 0, 0])).unwrap();
        assert_eq!(decode_order(raw[0], 20), 11);
    }

    #[test]
    fn constant_order_decodes_back() {
        let mut p = ConstantOrder::factory(7, 20, 0.9);
        let raw = p.act(&Observation::new(vec![])).unwrap();
        assert_eq!(decode_action(&raw, Role::Factory, CommScenario::Mixed, 20), Decoded { order: 7, comm_choice: Some(CommKind::Truth) });
    }
}
