//! Squashed Gaussian policy.
//!
//! The network emits a mean and a log-std per action dimension. A
//! pre-squash sample `u = μ + σ·ε` is mapped to `a = (tanh u + 1)/2 ∈ [0,1]`,
//! and the log-density carries the change-of-variables correction
//! `log|da/du| = ln 2 − 2u − 2·softplus(−2u)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mlp::{Forward, Mlp};
use super::real::Real;
use super::SacError;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2: f64 = core::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Stochastic,
    /// The squashed mean.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet<T> {
    pub net: Mlp<T>,
    act_dim: usize,
    log_std_min: f64,
    log_std_max: f64,
}

/// A batch of reparameterized samples plus what the backward pass needs.
pub struct PolicySample<T> {
    pub fwd: Forward<T>,
    pub actions: Vec<T>,
    pub log_probs: Vec<T>,
    pre_squash: Vec<T>,
    sigma: Vec<T>,
    noise: Vec<T>,
    clamped: Vec<bool>,
}

pub(crate) fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

impl<T: Real> PolicyNet<T> {
    pub fn new(net: Mlp<T>, act_dim: usize, log_std_min: f64, log_std_max: f64) -> Self {
        assert_eq!(net.output_width(), 2 * act_dim, "policy head must emit mean and log-std");
        PolicyNet { net, act_dim, log_std_min, log_std_max }
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_width()
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    /// Reparameterized samples for `batch` observations with the given
    /// standard-normal `noise` (`batch × act_dim`).
    pub fn sample(&self, obs: &[T], batch: usize, noise: &[T]) -> PolicySample<T> {
        let d = self.act_dim;
        assert_eq!(noise.len(), batch * d);
        let fwd = self.net.forward(obs, batch);
        let out = fwd.output();
        let (lo, hi) = (T::of(self.log_std_min), T::of(self.log_std_max));
        let mut actions = vec![T::zero(); batch * d];
        let mut log_probs = vec![T::zero(); batch];
        let mut pre_squash = vec![T::zero(); batch * d];
        let mut sigma = vec![T::zero(); batch * d];
        let mut clamped = vec![false; batch * d];
        let half = T::of(0.5);
        let two = T::of(2.0);
        for b in 0..batch {
            let mut lp = T::zero();
            for j in 0..d {
                let k = b * d + j;
                let mean = out[b * 2 * d + j];
                let raw_ls = out[b * 2 * d + d + j];
                let ls = raw_ls.max(lo).min(hi);
                clamped[k] = raw_ls < lo || raw_ls > hi;
                let s = ls.exp();
                let eps = noise[k];
                let u = mean + s * eps;
                actions[k] = (u.tanh() + T::one()) * half;
                let log_jac = T::of(LN_2) - two * u - two * softplus(-two * u);
                lp += -half * eps * eps - ls - T::of(HALF_LN_2PI) - log_jac;
                pre_squash[k] = u;
                sigma[k] = s;
            }
            log_probs[b] = lp;
        }
        PolicySample { fwd, actions, log_probs, pre_squash, sigma, noise: noise.to_vec(), clamped }
    }

    /// Gradient of `Σ_b (coef_logp_b·logπ_b + ⟨d_action_b, a_b⟩)` w.r.t. the
    /// network parameters, accumulated into `grad`.
    pub fn backward(&self, sample: &PolicySample<T>, coef_logp: &[T], d_action: &[T], grad: &mut [T]) {
        let d = self.act_dim;
        let batch = sample.fwd.batch();
        let mut d_out = vec![T::zero(); batch * 2 * d];
        let half = T::of(0.5);
        let two = T::of(2.0);
        for b in 0..batch {
            for j in 0..d {
                let k = b * d + j;
                let t = sample.pre_squash[k].tanh();
                // ε is held fixed, so ∂u/∂ls = σε.
                let du_dls = sample.sigma[k] * sample.noise[k];
                let da_du = half * (T::one() - t * t);
                // ∂logπ/∂u through the Jacobian term is 2·tanh(u).
                let dlogp_du = two * t;
                let d_u = coef_logp[b] * dlogp_du + d_action[k] * da_du;
                d_out[b * 2 * d + j] = d_u;
                d_out[b * 2 * d + d + j] = if sample.clamped[k] { T::zero() } else { d_u * du_dls - coef_logp[b] };
            }
        }
        self.net.backward(&sample.fwd, &d_out, grad, false);
    }

    /// One action in `[0,1]^d` for a single observation.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], mode: ActMode, rng: &mut R) -> Result<Vec<f64>, SacError> {
        if obs.len() != self.obs_dim() {
            return Err(SacError::Shape { expected: self.obs_dim(), got: obs.len() });
        }
        let x: Vec<T> = obs.iter().map(|&v| T::of(v)).collect();
        let noise: Vec<T> = match mode {
            ActMode::Deterministic => vec![T::zero(); self.act_dim],
            ActMode::Stochastic => (0..self.act_dim).map(|_| T::of(StandardNormal.sample(rng))).collect(),
        };
        let s = self.sample(&x, 1, &noise);
        Ok(s.actions.iter().map(|a| a.f64().clamp(0.0, 1.0)).collect())
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn small_policy() -> PolicyNet<f64> {
        let mut rng = stream(5, 0);
        PolicyNet::new(Mlp::init(&[3, 4, 4], &mut rng), 2, -20.0, 2.0)
    }

    #[test]
    fn zero_network_acts_at_half() {
        let p = PolicyNet::new(Mlp::<f64>::zeros(&[6, 8, 8, 2]), 1, -20.0, 2.0);
        let mut rng = stream(0, 0);
        assert_eq!(p.act(&[1.0; 6], ActMode::Deterministic, &mut rng).unwrap(), [0.5]);
    }

    #[test]
    fn width_mismatch_is_error() {
        let p = small_policy();
        let mut rng = stream(0, 0);
        assert_eq!(p.act(&[1.0; 4], ActMode::Deterministic, &mut rng), Err(SacError::Shape { expected: 3, got: 4 }));
    }

    #[test]
    fn stochastic_is_seeded() {
        let p = small_policy();
        let a = p.act(&[0.1, 0.2, 0.3], ActMode::Stochastic, &mut stream(11, 0)).unwrap();
        let b = p.act(&[0.1, 0.2, 0.3], ActMode::Stochastic, &mut stream(11, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn log_prob_matches_density_by_quadrature() {
        // For a one-dimensional squashed Gaussian, exp(logπ(a)) integrated
        // over a ∈ (0,1) is 1.
        let p = PolicyNet::new(Mlp::<f64>::zeros(&[1, 2]), 1, -20.0, 2.0);
        let mut net = p.clone();
        net.net.params_mut()[2] = 0.3; // mean bias
        net.net.params_mut()[3] = -0.5; // log-std bias
        let sigma = (-0.5f64).exp();
        let n = 20_000;
        let mut total = 0.0;
        for i in 0..n {
            let a = (i as f64 + 0.5) / n as f64;
            let u = (2.0 * a - 1.0).atanh();
            let eps = (u - 0.3) / sigma;
            let s = net.sample(&[0.0], 1, &[eps]);
            assert!((s.actions[0] - a).abs() < 1e-9);
            total += s.log_probs[0].exp() / n as f64;
        }
        assert!((total - 1.0).abs() < 1e-3, "density integrates to {total}");
    }

    #[test]
    fn backward_matches_finite_differences() {
        let p = small_policy();
        let obs = [0.2, -0.1, 0.4, 0.9, 0.3, -0.6];
        let noise = [0.3, -1.1, 0.7, 0.05];
        let coef = [0.8, 1.3];
        let da = [0.4, -0.2, 1.5, 0.9];
        let f = |q: &PolicyNet<f64>| -> f64 {
            let s = q.sample(&obs, 2, &noise);
            (0..2).map(|b| coef[b] * s.log_probs[b]).sum::<f64>() + s.actions.iter().zip(&da).map(|(a, d)| a * d).sum::<f64>()
        };
        let s = p.sample(&obs, 2, &noise);
        let mut grad = vec![0.0; p.net.params().len()];
        p.backward(&s, &coef, &da, &mut grad);
        let h = 1e-6;
        for i in 0..grad.len() {
            let mut plus = p.clone();
            plus.net.params_mut()[i] += h;
            let mut minus = p.clone();
            minus.net.params_mut()[i] -= h;
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-7 * (1.0 + fd.abs()), "param {i}: fd {fd} vs {}", grad[i]);
        }
    }
}
