//! Soft actor-critic learner: squashed Gaussian policy, twin critics with
//! Polyak-averaged targets, learned entropy temperature and prioritized
//! replay. Each supply-chain node owns one independent instance.

pub mod actor;
pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod losses;
pub mod mlp;
pub mod real;
pub mod replay;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub use actor::{ActMode, PolicyNet};
pub use adam::Adam;
pub use mlp::{soft_update, Mlp};
pub use real::Real;
pub use replay::{Batch, PerParams, ReplayBuffer};

use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SacError {
    #[error("observation width {got} does not match policy input width {expected}")]
    Shape { expected: usize, got: usize },
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("non-finite {0} during update")]
    NonFinite(&'static str),
    #[error("invalid hyperparameter: {0}")]
    Config(&'static str),
}

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SacConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub alpha_lr: f64,
    pub batch_size: usize,
    pub initial_alpha: f64,
    pub tau: f64,
    /// Defaults to `−action_dim`.
    pub target_entropy: Option<f64>,
    pub replay_capacity: usize,
    /// Updates are skipped until the buffer holds this many transitions.
    pub min_fill: usize,
    pub updates_per_step: usize,
    pub per_alpha: f64,
    pub per_beta: f64,
    pub per_eps: f64,
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            hidden: vec![256, 256],
            gamma: 0.99,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            alpha_lr: 1e-3,
            batch_size: 256,
            initial_alpha: 1.0,
            tau: 0.005,
            target_entropy: None,
            replay_capacity: 100_000,
            min_fill: 1000,
            updates_per_step: 1,
            per_alpha: 0.6,
            per_beta: 0.4,
            per_eps: 1e-6,
            log_std_min: -20.0,
            log_std_max: 2.0,
        }
    }
}

impl SacConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SacError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SacError::Config("gamma must lie in (0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(SacError::Config("tau must lie in (0, 1]"));
        }
        if self.batch_size == 0 {
            return Err(SacError::Config("batch_size must be at least 1"));
        }
        if !(self.initial_alpha > 0.0) {
            return Err(SacError::Config("initial_alpha must be positive"));
        }
        if self.replay_capacity == 0 {
            return Err(SacError::Config("replay_capacity must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(SacError::Config("hidden widths must be positive"));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0 && self.alpha_lr > 0.0) {
            return Err(SacError::Config("learning rates must be positive"));
        }
        if !(self.log_std_min < self.log_std_max) {
            return Err(SacError::Config("log_std_min must be below log_std_max"));
        }
        Ok(())
    }

    fn per(&self) -> PerParams {
        PerParams { alpha: self.per_alpha, beta: self.per_beta, eps: self.per_eps }
    }

    pub fn target_entropy_for(&self, act_dim: usize) -> f64 {
        self.target_entropy.unwrap_or(-(act_dim as f64))
    }

    fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.hidden.len() + 2);
        s.push(input);
        s.extend_from_slice(&self.hidden);
        s.push(output);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub mean_log_prob: f64,
    pub mean_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome {
    /// Not enough transitions yet.
    Skipped {
        buffered: usize,
        min_fill: usize,
    },
    Trained(UpdateStats),
}

/// The online and target critics.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticPair<T> {
    pub q1: Mlp<T>,
    pub q2: Mlp<T>,
    pub q1_target: Mlp<T>,
    pub q2_target: Mlp<T>,
}

pub struct SacAgent<T> {
    id: String,
    cfg: SacConfig,
    obs_dim: usize,
    act_dim: usize,
    pub policy: PolicyNet<T>,
    pub critics: CriticPair<T>,
    log_alpha: f64,
    opt_actor: Adam<T>,
    opt_q1: Adam<T>,
    opt_q2: Adam<T>,
    opt_alpha: Adam<f64>,
    replay: ReplayBuffer,
    rng: SimRng,
    updates: u64,
}

fn all_finite<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl<T: Real> SacAgent<T> {
    pub fn new(id: &str, obs_dim: usize, act_dim: usize, cfg: SacConfig, mut rng: SimRng) -> Result<Self, SacError> {
        cfg.validate()?;
        let policy = PolicyNet::new(Mlp::init(&cfg.sizes(obs_dim, 2 * act_dim), &mut rng), act_dim, cfg.log_std_min, cfg.log_std_max);
        let q1 = Mlp::init(&cfg.sizes(obs_dim + act_dim, 1), &mut rng);
        let q2 = Mlp::init(&cfg.sizes(obs_dim + act_dim, 1), &mut rng);
        let critics = CriticPair { q1_target: q1.clone(), q2_target: q2.clone(), q1, q2 };
        let log_alpha = Float::ln(cfg.initial_alpha);
        Ok(Self::assemble(id, obs_dim, act_dim, cfg, policy, critics, log_alpha, rng))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(id: &str, obs_dim: usize, act_dim: usize, cfg: SacConfig, policy: PolicyNet<T>, critics: CriticPair<T>, log_alpha: f64, rng: SimRng) -> Self {
        SacAgent {
            id: id.into(),
            opt_actor: Adam::new(policy.net.params().len(), cfg.actor_lr),
            opt_q1: Adam::new(critics.q1.params().len(), cfg.critic_lr),
            opt_q2: Adam::new(critics.q2.params().len(), cfg.critic_lr),
            opt_alpha: Adam::new(1, cfg.alpha_lr),
            replay: ReplayBuffer::new(cfg.replay_capacity, obs_dim, act_dim, cfg.per()),
            cfg,
            obs_dim,
            act_dim,
            policy,
            critics,
            log_alpha,
            rng,
            updates: 0,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn alpha(&self) -> f64 {
        Float::exp(self.log_alpha)
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    /// Acts with the agent's own random stream.
    pub fn act(&mut self, obs: &[f64], mode: ActMode) -> Result<Vec<f64>, SacError> {
        self.policy.act(obs, mode, &mut self.rng)
    }

    pub fn remember(&mut self, obs: &[f64], action: &[f64], reward: f64, next_obs: &[f64], done: bool) {
        self.replay.push(obs, action, reward, next_obs, done);
    }

    fn noise(&mut self, n: usize) -> Vec<T> {
        (0..n).map(|_| T::of(StandardNormal.sample(&mut self.rng))).collect()
    }

    /// One gradient step on critics, actor and temperature, then a soft
    /// target update.
    pub fn update(&mut self) -> Result<UpdateOutcome, SacError> {
        let min_fill = self.cfg.min_fill.max(1);
        if self.replay.len() < min_fill {
            return Ok(UpdateOutcome::Skipped { buffered: self.replay.len(), min_fill });
        }
        let n = self.cfg.batch_size;
        let batch: Batch<T> = self.replay.sample(n, &mut self.rng)?;
        let alpha = self.alpha();
        let alpha_t = T::of(alpha);
        let (od, ad) = (self.obs_dim, self.act_dim);

        // Critic targets from the current policy at s′.
        let next_noise = self.noise(n * ad);
        let next = self.policy.sample(&batch.next_obs, n, &next_noise);
        let next_inputs = losses::concat_rows(&batch.next_obs, od, &next.actions, ad, n);
        let t1 = self.critics.q1_target.forward(&next_inputs, n);
        let t2 = self.critics.q2_target.forward(&next_inputs, n);
        let next_min: Vec<T> = t1.output().iter().zip(t2.output()).map(|(&a, &b)| a.min(b)).collect();
        let targets = losses::td_targets(&batch.rewards, &batch.dones, &next_min, &next.log_probs, self.cfg.gamma, alpha_t);

        let inputs = losses::concat_rows(&batch.obs, od, &batch.actions, ad, n);
        let c1 = losses::critic_loss(&self.critics.q1, &inputs, &targets, &batch.weights, n);
        let c2 = losses::critic_loss(&self.critics.q2, &inputs, &targets, &batch.weights, n);
        if !(c1.loss.is_finite() && c2.loss.is_finite() && all_finite(&c1.grad) && all_finite(&c2.grad)) {
            return Err(SacError::NonFinite("critic loss"));
        }
        self.opt_q1.step(self.critics.q1.params_mut(), &c1.grad);
        self.opt_q2.step(self.critics.q2.params_mut(), &c2.grad);

        let noise = self.noise(n * ad);
        let a = losses::actor_loss(&self.policy, &self.critics.q1, &self.critics.q2, &batch.obs, &noise, alpha_t, n);
        if !(a.loss.is_finite() && all_finite(&a.grad)) {
            return Err(SacError::NonFinite("actor loss"));
        }
        self.opt_actor.step(self.policy.net.params_mut(), &a.grad);

        let mean_log_prob = a.log_probs.iter().map(|lp| lp.f64()).sum::<f64>() / n as f64;
        let target_entropy = self.cfg.target_entropy_for(ad);
        let mut log_alpha = [self.log_alpha];
        self.opt_alpha.step(&mut log_alpha, &[-(mean_log_prob + target_entropy)]);
        if !log_alpha[0].is_finite() {
            return Err(SacError::NonFinite("temperature"));
        }
        self.log_alpha = log_alpha[0];

        soft_update(self.critics.q1_target.params_mut(), self.critics.q1.params(), self.cfg.tau);
        soft_update(self.critics.q2_target.params_mut(), self.critics.q2.params(), self.cfg.tau);

        for (k, &idx) in batch.indices.iter().enumerate() {
            let td = 0.5 * ((c1.q[k] - targets[k]).abs() + (c2.q[k] - targets[k]).abs()).f64();
            self.replay.set_priority(idx, td);
        }
        self.updates += 1;
        let mean_q = c1.q.iter().zip(&c2.q).map(|(&x, &y)| x.min(y).f64()).sum::<f64>() / n as f64;
        Ok(UpdateOutcome::Trained(UpdateStats { critic_loss: c1.loss + c2.loss, actor_loss: a.loss, alpha, mean_log_prob, mean_q }))
    }

    /// Draws a uniform random action, for warm-up exploration.
    pub fn random_action(&mut self) -> Vec<f64> {
        (0..self.act_dim).map(|_| self.rng.random::<f64>()).collect()
    }
}
