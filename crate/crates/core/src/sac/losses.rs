//! Soft actor-critic losses with hand-derived gradients.
//!
//! These are free functions over explicit inputs (networks, batch rows,
//! fixed noise) so they can be checked against finite differences.

use alloc::vec;
use alloc::vec::Vec;

use super::actor::PolicyNet;
use super::mlp::Mlp;
use super::real::Real;

/// Row-wise concatenation of two row-major matrices.
pub fn concat_rows<T: Copy>(a: &[T], a_width: usize, b: &[T], b_width: usize, batch: usize) -> Vec<T> {
    assert_eq!(a.len(), a_width * batch);
    assert_eq!(b.len(), b_width * batch);
    let mut out = Vec::with_capacity(batch * (a_width + b_width));
    for r in 0..batch {
        out.extend_from_slice(&a[r * a_width..(r + 1) * a_width]);
        out.extend_from_slice(&b[r * b_width..(r + 1) * b_width]);
    }
    out
}

/// `y = r + γ·(1 − done)·(min Q̄(s′,a′) − α·logπ(a′|s′))`; terminal rows
/// bootstrap nothing and return `r` unchanged.
pub fn td_targets<T: Real>(rewards: &[T], dones: &[T], next_min_q: &[T], next_log_probs: &[T], gamma: f64, alpha: T) -> Vec<T> {
    let gamma = T::of(gamma);
    rewards
        .iter()
        .zip(dones)
        .zip(next_min_q.iter().zip(next_log_probs))
        .map(|((&r, &d), (&q, &lp))| if d > T::zero() { r } else { r + gamma * (q - alpha * lp) })
        .collect()
}

pub struct CriticLoss<T> {
    pub loss: f64,
    pub grad: Vec<T>,
    pub q: Vec<T>,
}

/// `L = (1/B)·Σ_b w_b·½·(Q(x_b) − y_b)²`.
pub fn critic_loss<T: Real>(critic: &Mlp<T>, inputs: &[T], targets: &[T], weights: &[T], batch: usize) -> CriticLoss<T> {
    let fwd = critic.forward(inputs, batch);
    let q = fwd.output().to_vec();
    let inv_b = T::of(1.0 / batch as f64);
    let half = T::of(0.5);
    let mut loss = T::zero();
    let mut d_out = vec![T::zero(); batch];
    for b in 0..batch {
        let err = q[b] - targets[b];
        loss += weights[b] * half * err * err * inv_b;
        d_out[b] = weights[b] * err * inv_b;
    }
    let mut grad = vec![T::zero(); critic.params().len()];
    critic.backward(&fwd, &d_out, &mut grad, false);
    CriticLoss { loss: loss.f64(), grad, q }
}

pub struct ActorLoss<T> {
    pub loss: f64,
    pub grad: Vec<T>,
    pub log_probs: Vec<T>,
}

/// `L = (1/B)·Σ_b (α·logπ(ã_b|s_b) − min(Q₁, Q₂)(s_b, ã_b))` with
/// `ã = squash(μ + σ·noise)`. Critics are held fixed.
pub fn actor_loss<T: Real>(policy: &PolicyNet<T>, q1: &Mlp<T>, q2: &Mlp<T>, obs: &[T], noise: &[T], alpha: T, batch: usize) -> ActorLoss<T> {
    let obs_dim = policy.obs_dim();
    let act_dim = policy.act_dim();
    let sample = policy.sample(obs, batch, noise);
    let inputs = concat_rows(obs, obs_dim, &sample.actions, act_dim, batch);
    let f1 = q1.forward(&inputs, batch);
    let f2 = q2.forward(&inputs, batch);
    let inv_b = T::of(1.0 / batch as f64);

    let mut loss = T::zero();
    let mut d1 = vec![T::zero(); batch];
    let mut d2 = vec![T::zero(); batch];
    for b in 0..batch {
        let (v1, v2) = (f1.output()[b], f2.output()[b]);
        let min_q = if v1 <= v2 {
            d1[b] = -inv_b;
            v1
        } else {
            d2[b] = -inv_b;
            v2
        };
        loss += (alpha * sample.log_probs[b] - min_q) * inv_b;
    }
    let g1 = q1.input_gradient(&f1, &d1);
    let g2 = q2.input_gradient(&f2, &d2);
    let width = obs_dim + act_dim;
    let mut d_action = vec![T::zero(); batch * act_dim];
    for b in 0..batch {
        for j in 0..act_dim {
            d_action[b * act_dim + j] = g1[b * width + obs_dim + j] + g2[b * width + obs_dim + j];
        }
    }
    let coef = vec![alpha * inv_b; batch];
    let mut grad = vec![T::zero(); policy.net.params().len()];
    policy.backward(&sample, &coef, &d_action, &mut grad);
    ActorLoss { loss: loss.f64(), grad, log_probs: sample.log_probs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_target_is_reward() {
        let y = td_targets(&[1.7f64, 2.0], &[1.0, 0.0], &[5.0, 5.0], &[0.5, 0.5], 0.99, 1.0);
        assert_eq!(y[0], 1.7);
        assert_eq!(y[1], 2.0 + 0.99 * (5.0 - 0.5));
        // Even a non-finite bootstrap is ignored on terminal rows.
        let y = td_targets(&[-3.0f64], &[1.0], &[f64::NAN], &[f64::INFINITY], 0.99, 1.0);
        assert_eq!(y[0], -3.0);
    }

    #[test]
    fn concat_interleaves_rows() {
        assert_eq!(concat_rows(&[1, 2, 3, 4], 2, &[9, 8], 1, 2), [1, 2, 9, 3, 4, 8]);
    }
}
