//! Two-echelon supply-chain laboratory core.
//!
//! A factory and a retailer each run an independent soft actor-critic learner
//! while the factory decides how much of its inventory to disclose downstream.
//! Everything in this crate is pure computation over `alloc`: the environment,
//! demand generators, disclosure protocols, reward schemes, the learners, an
//! exhaustive oracle for tiny instances, and metric accumulation. File IO and
//! the command line live in `echelon-lab`.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod comm;
pub mod demand;
pub mod env;
pub mod metrics;
pub mod money;
pub mod oracle;
pub mod params;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod sac;
pub mod stats;
pub mod training;

pub use comm::{CommKind, CommScenario, Observation};
pub use demand::{DemandModel, DemandRegime};
pub use env::{ActionPair, AgentState, EnvState, StepError, StepRecord, SupplyChainEnv, TerminationCause};
pub use money::Money;
pub use params::{EnvParams, ParamError};
pub use reward::RewardScheme;
