//! Proportional prioritized experience replay backed by a sum tree.
//!
//! A transition with priority `p` is drawn with probability
//! `(p + ε)^α / Σ_k (p_k + ε)^α` and weighted by `(N·P)^−β`, normalized so
//! the largest weight in the batch is 1.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use super::real::Real;
use super::SacError;

/// Binary sum tree over a fixed number of leaves. Internal nodes are
/// recomputed from their children on every write so sums never drift.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        SumTree { leaves, nodes: vec![0.0; 2 * leaves] }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.nodes[self.leaves + index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        let mut i = self.leaves + index;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass ∈ [0, total)`.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut i = 1;
        while i < self.leaves {
            let left = self.nodes[2 * i];
            if mass < left || self.nodes[2 * i + 1] <= 0.0 {
                i *= 2;
            } else {
                mass -= left;
                i = 2 * i + 1;
            }
        }
        i - self.leaves
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerParams {
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
}

impl Default for PerParams {
    fn default() -> Self {
        PerParams { alpha: 0.6, beta: 0.4, eps: 1e-6 }
    }
}

/// A sampled mini-batch, row-major.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub indices: Vec<usize>,
    pub obs: Vec<T>,
    pub actions: Vec<T>,
    pub rewards: Vec<T>,
    pub next_obs: Vec<T>,
    pub dones: Vec<T>,
    pub weights: Vec<T>,
}

impl<T> Batch<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    per: PerParams,
    obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_obs: Vec<f64>,
    dones: Vec<bool>,
    tree: SumTree,
    max_priority: f64,
    len: usize,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize, per: PerParams) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            capacity,
            obs_dim,
            act_dim,
            per,
            obs: vec![0.0; capacity * obs_dim],
            actions: vec![0.0; capacity * act_dim],
            rewards: vec![0.0; capacity],
            next_obs: vec![0.0; capacity * obs_dim],
            dones: vec![false; capacity],
            tree: SumTree::new(capacity),
            max_priority: 1.0,
            len: 0,
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn scaled(&self, priority: f64) -> f64 {
        Float::powf(priority + self.per.eps, self.per.alpha)
    }

    /// Stores a transition at the current maximum priority, overwriting the
    /// oldest one once full.
    pub fn push(&mut self, obs: &[f64], action: &[f64], reward: f64, next_obs: &[f64], done: bool) {
        assert_eq!(obs.len(), self.obs_dim);
        assert_eq!(next_obs.len(), self.obs_dim);
        assert_eq!(action.len(), self.act_dim);
        let i = self.next;
        self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(obs);
        self.next_obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(next_obs);
        self.actions[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(action);
        self.rewards[i] = reward;
        self.dones[i] = done;
        let p = self.scaled(self.max_priority);
        self.tree.set(i, p);
        self.next = (i + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Sets raw priorities (before ε and α) for previously sampled indices.
    pub fn set_priority(&mut self, index: usize, priority: f64) {
        assert!(index < self.len);
        let priority = if priority.is_finite() { priority.abs() } else { self.max_priority };
        self.max_priority = self.max_priority.max(priority);
        let p = self.scaled(priority);
        self.tree.set(index, p);
    }

    /// Probability of drawing `index` on one draw.
    pub fn probability(&self, index: usize) -> f64 {
        self.tree.get(index) / self.tree.total()
    }

    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>, SacError> {
        if self.len == 0 {
            return Err(SacError::EmptyBuffer);
        }
        let total = self.tree.total();
        Ok((0..n)
            .map(|_| {
                let mass = rng.random::<f64>() * total;
                self.tree.find(mass).min(self.len - 1)
            })
            .collect())
    }

    pub fn sample<T: Real, R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch<T>, SacError> {
        let indices = self.sample_indices(n, rng)?;
        let count = self.len as f64;
        let mut weights: Vec<f64> = indices.iter().map(|&i| Float::powf(count * self.probability(i), -self.per.beta)).collect();
        let max_w = weights.iter().cloned().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= max_w);

        let gather =
            |src: &[f64], width: usize| -> Vec<T> { indices.iter().flat_map(|&i| src[i * width..(i + 1) * width].iter().map(|&v| T::of(v))).collect() };
        Ok(Batch {
            obs: gather(&self.obs, self.obs_dim),
            actions: gather(&self.actions, self.act_dim),
            rewards: indices.iter().map(|&i| T::of(self.rewards[i])).collect(),
            next_obs: gather(&self.next_obs, self.obs_dim),
            dones: indices.iter().map(|&i| if self.dones[i] { T::one() } else { T::zero() }).collect(),
            weights: weights.into_iter().map(T::of).collect(),
            indices,
        })
    }
}
