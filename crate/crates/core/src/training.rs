//! The simultaneous-move training loop and deterministic evaluation.
//!
//! Each day both agents observe the same pre-step state and act at once,
//! demand is drawn, the environment steps, and each agent stores its own
//! transition and takes its gradient steps. A terminated episode resets
//! immediately; its elapsed days count toward the training budget.

use alloc::format;
use alloc::string::String;

use thiserror::Error;

use crate::comm::{CommScenario, Observation};
use crate::demand::{DemandModel, DemandRegime};
use crate::env::{StepError, StepRecord, SupplyChainEnv};
use crate::metrics::{MetricsAccumulator, MetricsSummary};
use crate::params::{EnvParams, ParamError};
use crate::policy::{joint_action, Learned, ObsScaling, OrderingPolicy, Role};
use crate::reward::RewardScheme;
use crate::rng::{self, stream};
use crate::sac::{ActMode, Real, SacAgent, SacConfig, SacError, UpdateOutcome, UpdateStats};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("environment parameters: {0}")]
    Params(#[from] ParamError),
    #[error("learner: {0}")]
    Sac(#[from] SacError),
    #[error("step: {0}")]
    Step(#[from] StepError),
    #[error("{0}")]
    Config(String),
}

/// Everything that defines one training run apart from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSetup {
    pub regime: DemandRegime,
    pub scenario: CommScenario,
    pub scheme: RewardScheme,
    pub env: EnvParams,
    pub sac: SacConfig,
    pub scaling: ObsScaling,
    /// Multiplies rewards before they enter the replay buffer.
    pub reward_scale: f64,
    /// Days of uniform random actions before the policies take over.
    pub warmup_days: u64,
}

impl TrainSetup {
    pub fn new(regime: DemandRegime, scenario: CommScenario, scheme: RewardScheme) -> Self {
        TrainSetup {
            regime,
            scenario,
            scheme,
            env: EnvParams::default(),
            sac: SacConfig::default(),
            scaling: ObsScaling::default(),
            reward_scale: 0.01,
            warmup_days: 1000,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.env.validate()?;
        self.sac.validate()?;
        if !(self.reward_scale.is_finite() && self.reward_scale > 0.0) {
            return Err(TrainError::Config(format!("reward_scale must be positive, got {}", self.reward_scale)));
        }
        if !(self.scaling.quantity > 0.0 && self.scaling.day > 0.0) {
            return Err(TrainError::Config(String::from("observation scaling divisors must be positive")));
        }
        Ok(())
    }
}

/// The two heterogeneous learners.
pub struct AgentPair<T> {
    pub retailer: SacAgent<T>,
    pub factory: SacAgent<T>,
}

impl<T: Real> AgentPair<T> {
    pub fn new(sac: &SacConfig, seed: u64) -> Result<Self, SacError> {
        Ok(AgentPair {
            retailer: SacAgent::new(
                Role::Retailer.as_str(),
                Role::Retailer.obs_dim(),
                Role::Retailer.act_dim(),
                sac.clone(),
                stream(seed, rng::STREAM_RETAILER),
            )?,
            factory: SacAgent::new(Role::Factory.as_str(), Role::Factory.obs_dim(), Role::Factory.act_dim(), sac.clone(), stream(seed, rng::STREAM_FACTORY))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Progress {
    pub days: u64,
    pub episodes_started: u64,
    pub updates: u64,
    pub last_retailer: Option<UpdateStats>,
    pub last_factory: Option<UpdateStats>,
}

pub struct Trainer<T> {
    setup: TrainSetup,
    env: SupplyChainEnv,
    demand: DemandModel,
    agents: AgentPair<T>,
    progress: Progress,
}

fn learn<T: Real>(agent: &mut SacAgent<T>, times: usize) -> Result<Option<UpdateStats>, SacError> {
    let mut last = None;
    for _ in 0..times {
        if let UpdateOutcome::Trained(stats) = agent.update()? {
            last = Some(stats);
        }
    }
    Ok(last)
}

impl<T: Real> Trainer<T> {
    pub fn new(setup: TrainSetup, seed: u64) -> Result<Self, TrainError> {
        setup.validate()?;
        let env = SupplyChainEnv::new(setup.env.clone(), setup.scenario, setup.scheme, stream(seed, rng::STREAM_COMM))?;
        let demand = DemandModel::new(setup.regime, stream(seed, rng::STREAM_DEMAND));
        let agents = AgentPair::new(&setup.sac, seed)?;
        Ok(Trainer { setup, env, demand, agents, progress: Progress { episodes_started: 1, ..Progress::default() } })
    }

    pub fn setup(&self) -> &TrainSetup {
        &self.setup
    }

    pub fn progress(&self) -> Progress {
        self.progress
    }

    pub fn agents(&self) -> &AgentPair<T> {
        &self.agents
    }

    pub fn into_agents(self) -> AgentPair<T> {
        self.agents
    }

    fn raw_action(&mut self, role: Role, obs: &Observation) -> Result<alloc::vec::Vec<f64>, SacError> {
        let warm = self.progress.days < self.setup.warmup_days;
        let agent = match role {
            Role::Retailer => &mut self.agents.retailer,
            Role::Factory => &mut self.agents.factory,
        };
        if warm {
            Ok(agent.random_action())
        } else {
            agent.act(&self.setup.scaling.features(obs), ActMode::Stochastic)
        }
    }

    /// Simulates one day and trains on it.
    pub fn step_day(&mut self) -> Result<StepRecord, TrainError> {
        let obs_r = self.env.retailer_observation();
        let obs_f = self.env.factory_observation();
        let raw_r = self.raw_action(Role::Retailer, &obs_r)?;
        let raw_f = self.raw_action(Role::Factory, &obs_f)?;
        let actions = joint_action(&raw_r, &raw_f, self.setup.scenario, self.setup.env.order_max);
        let demand = self.demand.sample();
        let rec = self.env.step(actions, demand)?;

        let (rew_r, rew_f) = rec.scheme_rewards(&self.setup.scheme);
        let scale = self.setup.reward_scale;
        let s = &self.setup.scaling;
        let next_r = s.features(&self.env.retailer_observation());
        let next_f = s.features(&self.env.factory_observation());
        self.agents.retailer.remember(&s.features(&obs_r), &raw_r, rew_r.to_f64() * scale, &next_r, rec.terminated);
        self.agents.factory.remember(&s.features(&obs_f), &raw_f, rew_f.to_f64() * scale, &next_f, rec.terminated);

        let times = self.setup.sac.updates_per_step;
        if let Some(stats) = learn(&mut self.agents.retailer, times)? {
            self.progress.last_retailer = Some(stats);
        }
        if let Some(stats) = learn(&mut self.agents.factory, times)? {
            self.progress.last_factory = Some(stats);
        }
        self.progress.updates = self.agents.retailer.updates();
        self.progress.days += 1;
        if rec.terminated {
            self.env.reset();
            self.progress.episodes_started += 1;
        }
        Ok(rec)
    }

    /// Runs `days` more days, handing every record to `sink`.
    pub fn run(&mut self, days: u64, mut sink: impl FnMut(&StepRecord)) -> Result<Progress, TrainError> {
        for _ in 0..days {
            let rec = self.step_day()?;
            sink(&rec);
        }
        Ok(self.progress)
    }
}

/// What an evaluation needs to rebuild the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSetup {
    pub regime: DemandRegime,
    pub scenario: CommScenario,
    pub scheme: RewardScheme,
    pub env: EnvParams,
}

impl From<&TrainSetup> for EvalSetup {
    fn from(t: &TrainSetup) -> Self {
        EvalSetup { regime: t.regime, scenario: t.scenario, scheme: t.scheme, env: t.env.clone() }
    }
}

/// Runs `episodes` complete episodes on the evaluation streams of `seed`.
pub fn evaluate(
    retailer: &mut dyn OrderingPolicy,
    factory: &mut dyn OrderingPolicy,
    setup: &EvalSetup,
    episodes: u32,
    seed: u64,
    mut sink: impl FnMut(&StepRecord),
) -> Result<MetricsSummary, TrainError> {
    let mut env = SupplyChainEnv::new(setup.env.clone(), setup.scenario, setup.scheme, stream(seed, rng::STREAM_EVAL_COMM))?;
    let mut demand = DemandModel::new(setup.regime, stream(seed, rng::STREAM_EVAL_DEMAND));
    let mut acc = MetricsAccumulator::new(setup.scheme);
    for episode in 0..episodes {
        if episode > 0 {
            env.reset();
        }
        loop {
            let raw_r = retailer.act(&env.retailer_observation())?;
            let raw_f = factory.act(&env.factory_observation())?;
            let actions = joint_action(&raw_r, &raw_f, setup.scenario, setup.env.order_max);
            let rec = env.step(actions, demand.sample())?;
            acc.push(&rec);
            sink(&rec);
            if rec.terminated {
                break;
            }
        }
    }
    Ok(acc.summary())
}

/// Evaluates learned agents with deterministic actions.
pub fn evaluate_agents<T: Real>(
    agents: &mut AgentPair<T>,
    scaling: ObsScaling,
    setup: &EvalSetup,
    episodes: u32,
    seed: u64,
    sink: impl FnMut(&StepRecord),
) -> Result<MetricsSummary, TrainError> {
    let mut r = Learned { agent: &mut agents.retailer, scaling, mode: ActMode::Deterministic };
    let mut f = Learned { agent: &mut agents.factory, scaling, mode: ActMode::Deterministic };
    evaluate(&mut r, &mut f, setup, episodes, seed, sink)
}
