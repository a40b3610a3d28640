//! Versioned binary checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic        8 bytes  "ECHCKPT\0"
//! version      u32      1
//! scalar       u8       4 (f32) or 8 (f64)
//! id           u32 length + UTF-8 bytes
//! hyper hash   32 bytes SHA-256 of the canonical hyperparameter string
//! obs_dim      u32
//! act_dim      u32
//! log_alpha    f64
//! networks     5 × { u32 layer count, u32 widths…, u64 param count, params… }
//!              in the order policy, q1, q2, q1_target, q2_target
//! ```
//!
//! Parameters are written with their exact bit patterns, so a round trip is
//! lossless.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::actor::PolicyNet;
use super::mlp::Mlp;
use super::real::Real;
use super::{CriticPair, SacAgent, SacConfig};
use crate::rng::SimRng;

pub const MAGIC: &[u8; 8] = b"ECHCKPT\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint stores {found}-byte scalars, expected {expected}")]
    Scalar { expected: u8, found: u8 },
    #[error("truncated checkpoint")]
    Truncated,
    #[error("trailing bytes after checkpoint body")]
    Trailing,
    #[error("invalid UTF-8 in agent id")]
    BadId,
    #[error("network {0} has inconsistent shape")]
    BadNetwork(&'static str),
    #[error("checkpoint shapes ({found}) do not match configuration ({expected})")]
    ShapeMismatch { expected: String, found: String },
    #[error("hyperparameter hash differs from configuration")]
    HyperMismatch,
}

/// SHA-256 over every hyperparameter that shapes the learner.
pub fn hyper_hash(cfg: &SacConfig) -> [u8; 32] {
    let canonical = format!(
        "hidden={:?};gamma={:?};actor_lr={:?};critic_lr={:?};alpha_lr={:?};batch_size={};initial_alpha={:?};tau={:?};target_entropy={:?};replay_capacity={};min_fill={};updates_per_step={};per_alpha={:?};per_beta={:?};per_eps={:?};log_std_min={:?};log_std_max={:?}",
        cfg.hidden, cfg.gamma, cfg.actor_lr, cfg.critic_lr, cfg.alpha_lr, cfg.batch_size, cfg.initial_alpha, cfg.tau,
        cfg.target_entropy, cfg.replay_capacity, cfg.min_fill, cfg.updates_per_step, cfg.per_alpha, cfg.per_beta,
        cfg.per_eps, cfg.log_std_min, cfg.log_std_max,
    );
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

/// The serializable state of one agent: networks and temperature. The replay
/// buffer and optimizer moments are not kept.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentCheckpoint<T> {
    pub id: String,
    pub hyper_hash: [u8; 32],
    pub obs_dim: usize,
    pub act_dim: usize,
    pub log_alpha: f64,
    pub policy: Mlp<T>,
    pub critics: CriticPair<T>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_net<T: Real>(out: &mut Vec<u8>, net: &Mlp<T>) {
    put_u32(out, net.sizes().len() as u32);
    for &s in net.sizes() {
        put_u32(out, s as u32);
    }
    out.extend_from_slice(&(net.params().len() as u64).to_le_bytes());
    for &p in net.params() {
        p.write_le(out);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.bytes.len() < n {
            return Err(CheckpointError::Truncated);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn net<T: Real>(&mut self, name: &'static str) -> Result<Mlp<T>, CheckpointError> {
        let layers = self.u32()? as usize;
        if layers > 64 {
            return Err(CheckpointError::BadNetwork(name));
        }
        let sizes = (0..layers).map(|_| self.u32().map(|s| s as usize)).collect::<Result<Vec<_>, _>>()?;
        let count = self.u64()? as usize;
        let width = T::BYTES as usize;
        let raw = self.take(count.checked_mul(width).ok_or(CheckpointError::Truncated)?)?;
        let params = raw.chunks_exact(width).map(T::read_le).collect();
        Mlp::from_params(&sizes, params).ok_or(CheckpointError::BadNetwork(name))
    }
}

impl<T: Real> AgentCheckpoint<T> {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        out.push(T::BYTES);
        put_u32(&mut out, self.id.len() as u32);
        out.extend_from_slice(self.id.as_bytes());
        out.extend_from_slice(&self.hyper_hash);
        put_u32(&mut out, self.obs_dim as u32);
        put_u32(&mut out, self.act_dim as u32);
        out.extend_from_slice(&self.log_alpha.to_le_bytes());
        for net in [&self.policy, &self.critics.q1, &self.critics.q2, &self.critics.q1_target, &self.critics.q2_target] {
            put_net(&mut out, net);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes };
        if r.take(8)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let scalar = r.take(1)?[0];
        if scalar != T::BYTES {
            return Err(CheckpointError::Scalar { expected: T::BYTES, found: scalar });
        }
        let id_len = r.u32()? as usize;
        let id = core::str::from_utf8(r.take(id_len)?).map_err(|_| CheckpointError::BadId)?.into();
        let mut hyper_hash = [0u8; 32];
        hyper_hash.copy_from_slice(r.take(32)?);
        let obs_dim = r.u32()? as usize;
        let act_dim = r.u32()? as usize;
        let log_alpha = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let policy = r.net("policy")?;
        let critics = CriticPair { q1: r.net("q1")?, q2: r.net("q2")?, q1_target: r.net("q1_target")?, q2_target: r.net("q2_target")? };
        if !r.bytes.is_empty() {
            return Err(CheckpointError::Trailing);
        }
        Ok(AgentCheckpoint { id, hyper_hash, obs_dim, act_dim, log_alpha, policy, critics })
    }
}

impl<T: Real> SacAgent<T> {
    pub fn checkpoint(&self) -> AgentCheckpoint<T> {
        AgentCheckpoint {
            id: self.id.clone(),
            hyper_hash: hyper_hash(&self.cfg),
            obs_dim: self.obs_dim,
            act_dim: self.act_dim,
            log_alpha: self.log_alpha,
            policy: self.policy.net.clone(),
            critics: self.critics.clone(),
        }
    }

    /// Rebuilds an agent from a checkpoint taken with the same
    /// configuration. Replay and optimizer state start empty.
    pub fn from_checkpoint(ckpt: AgentCheckpoint<T>, obs_dim: usize, act_dim: usize, cfg: SacConfig, rng: SimRng) -> Result<Self, CheckpointError> {
        let expected_policy = cfg.sizes(obs_dim, 2 * act_dim);
        let expected_critic = cfg.sizes(obs_dim + act_dim, 1);
        let shapes_ok = ckpt.obs_dim == obs_dim
            && ckpt.act_dim == act_dim
            && ckpt.policy.sizes() == expected_policy.as_slice()
            && [&ckpt.critics.q1, &ckpt.critics.q2, &ckpt.critics.q1_target, &ckpt.critics.q2_target].iter().all(|n| n.sizes() == expected_critic.as_slice());
        if !shapes_ok {
            return Err(CheckpointError::ShapeMismatch {
                expected: format!("obs {obs_dim}, act {act_dim}, policy {expected_policy:?}"),
                found: format!("obs {}, act {}, policy {:?}", ckpt.obs_dim, ckpt.act_dim, ckpt.policy.sizes()),
            });
        }
        if ckpt.hyper_hash != hyper_hash(&cfg) {
            return Err(CheckpointError::HyperMismatch);
        }
        let policy = PolicyNet::new(ckpt.policy, act_dim, cfg.log_std_min, cfg.log_std_max);
        Ok(SacAgent::assemble(&ckpt.id, obs_dim, act_dim, cfg, policy, ckpt.critics, ckpt.log_alpha, rng))
    }
}
