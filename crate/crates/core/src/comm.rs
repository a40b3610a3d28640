//! Factory-to-retailer inventory disclosure and agent observations.
//!
//! The factory picks a disclosure kind each day (fixed by the scenario, or
//! chosen by its policy in the mixed scenario). The kind decides the
//! communication factor ω and with it the fifth slot of the retailer's
//! observation. Disclosure never touches the physical dynamics.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use rand::Rng;

use crate::env::EnvState;

/// What the factory tells the retailer on a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CommKind {
    /// ω = 0; the slot is zero.
    NoComms,
    /// ω ~ U[0,1); the slot is ⌊ω·C₂⌋, independent of the true stock.
    Lying,
    /// ω = 1; the slot is the true factory inventory.
    Truth,
}

impl CommKind {
    pub const ALL: [CommKind; 3] = [CommKind::NoComms, CommKind::Lying, CommKind::Truth];

    pub fn as_str(self) -> &'static str {
        match self {
            CommKind::NoComms => "no_comms",
            CommKind::Lying => "lying",
            CommKind::Truth => "truth",
        }
    }

    pub fn index(self) -> usize {
        match self {
            CommKind::NoComms => 0,
            CommKind::Lying => 1,
            CommKind::Truth => 2,
        }
    }
}

impl fmt::Display for CommKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommKind {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_comms" => Ok(CommKind::NoComms),
            "lying" => Ok(CommKind::Lying),
            "truth" => Ok(CommKind::Truth),
            _ => Err(UnknownName),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownName;

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown name")
    }
}

/// The data-sharing protocol for a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CommScenario {
    NoComms,
    Truth,
    Lying,
    /// The factory's policy picks one of the three kinds every day.
    Mixed,
}

impl CommScenario {
    /// Column order used in every report.
    pub const ALL: [CommScenario; 4] = [CommScenario::NoComms, CommScenario::Truth, CommScenario::Lying, CommScenario::Mixed];

    /// The kind used when the factory's action does not choose one.
    pub fn fixed_kind(self) -> Option<CommKind> {
        match self {
            CommScenario::NoComms => Some(CommKind::NoComms),
            CommScenario::Truth => Some(CommKind::Truth),
            CommScenario::Lying => Some(CommKind::Lying),
            CommScenario::Mixed => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CommScenario::NoComms => "no_comms",
            CommScenario::Truth => "truth",
            CommScenario::Lying => "lying",
            CommScenario::Mixed => "mixed",
        }
    }

    /// Heading used in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            CommScenario::NoComms => "NoComms",
            CommScenario::Truth => "Truth",
            CommScenario::Lying => "Lying",
            CommScenario::Mixed => "Mixed",
        }
    }
}

impl fmt::Display for CommScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommScenario {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_comms" => Ok(CommScenario::NoComms),
            "truth" => Ok(CommScenario::Truth),
            "lying" => Ok(CommScenario::Lying),
            "mixed" => Ok(CommScenario::Mixed),
            _ => Err(UnknownName),
        }
    }
}

/// One day's message from the factory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disclosure {
    pub kind: CommKind,
    pub omega: f64,
    pub communicated: u32,
}

/// Maps the factory's true inventory to the value the retailer sees.
pub fn communicate<R: Rng + ?Sized>(kind: CommKind, true_inventory: u32, capacity_factory: u32, rng: &mut R) -> Disclosure {
    match kind {
        CommKind::NoComms => Disclosure { kind, omega: 0.0, communicated: 0 },
        CommKind::Truth => Disclosure { kind, omega: 1.0, communicated: true_inventory },
        CommKind::Lying => {
            let omega: f64 = rng.random();
            Disclosure { kind, omega, communicated: fake_inventory(omega, capacity_factory) }
        }
    }
}

/// ⌊ω·C₂⌋ for ω ∈ [0,1).
pub fn fake_inventory(omega: f64, capacity_factory: u32) -> u32 {
    Float::floor(omega * capacity_factory as f64) as u32
}

/// An agent's observation vector: six slots for the retailer
/// `[I₁, B₁, S₁, D₁, I_F, p]`, five for the factory `[I₂, B₂, S₂, D₂, p]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation(Vec<u32>);

impl Observation {
    pub const RETAILER_WIDTH: usize = 6;
    pub const FACTORY_WIDTH: usize = 5;

    pub fn new(slots: Vec<u32>) -> Self {
        Observation(slots)
    }

    pub fn slots(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn build_retailer_observation(state: &EnvState, communicated: u32) -> Observation {
    let r = &state.retailer;
    Observation(alloc::vec![r.inventory, r.backlog, r.stockout_level, r.last_demand, communicated, state.day])
}

pub fn build_factory_observation(state: &EnvState) -> Observation {
    let f = &state.factory;
    Observation(alloc::vec![f.inventory, f.backlog, f.stockout_level, f.last_demand, state.day])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::AgentState;
    use crate::rng::stream;

    fn state(retailer_inv: u32, factory_inv: u32, demand: u32, day: u32) -> EnvState {
        EnvState {
            retailer: AgentState { inventory: retailer_inv, backlog: 0, stockout_level: 0, last_demand: demand, stockout_events: 0 },
            factory: AgentState { inventory: factory_inv, backlog: 0, stockout_level: 0, last_demand: demand, stockout_events: 0 },
            day,
            episode: 0,
            last_retailer_order: 0,
            last_customer_demand: 0,
            communicated: 0,
            terminated: false,
        }
    }

    #[test]
    fn truth_is_identity() {
        let mut rng = stream(0, 0);
        assert_eq!(communicate(CommKind::Truth, 34, 59, &mut rng).communicated, 34);
    }

    #[test]
    fn no_comms_is_zero() {
        let mut rng = stream(0, 0);
        for inv in [0, 1, 34, 59, 200] {
            let d = communicate(CommKind::NoComms, inv, 59, &mut rng);
            assert_eq!((d.communicated, d.omega), (0, 0.0));
        }
    }

    #[test]
    fn lying_floors_omega_times_capacity() {
        assert_eq!(fake_inventory(0.5, 59), 29);
        assert_eq!(fake_inventory(0.0, 59), 0);
        assert_eq!(fake_inventory(0.999_999, 59), 58);
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            let d = communicate(CommKind::Lying, 10, 59, &mut rng);
            assert!((0.0..1.0).contains(&d.omega));
            assert!(d.communicated < 59);
        }
    }

    #[test]
    fn retailer_observation_slots() {
        let s = state(14, 28, 10, 3);
        assert_eq!(build_retailer_observation(&s, 0).slots(), &[14, 0, 0, 10, 0, 3]);
        assert_eq!(build_retailer_observation(&s, 28).slots(), &[14, 0, 0, 10, 28, 3]);
    }

    #[test]
    fn factory_observation_slots() {
        let s = state(14, 28, 10, 3);
        assert_eq!(build_factory_observation(&s).slots(), &[28, 0, 0, 10, 3]);
    }

    #[test]
    fn names_roundtrip() {
        for s in CommScenario::ALL {
            assert_eq!(s.as_str().parse::<CommScenario>(), Ok(s));
        }
        for k in CommKind::ALL {
            assert_eq!(k.as_str().parse::<CommKind>(), Ok(k));
        }
        assert!("liar".parse::<CommScenario>().is_err());
    }
}
