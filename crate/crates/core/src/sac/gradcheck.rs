//! Central finite differences against the analytic loss gradients.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::actor::PolicyNet;
use super::losses::{actor_loss, critic_loss};
use super::mlp::Mlp;
use crate::rng::stream;

/// `(f(θ + h·e_i) − f(θ − h·e_i)) / 2h` for every coordinate.
pub fn central_difference(params: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut theta = params.to_vec();
    (0..params.len())
        .map(|i| {
            theta[i] = params[i] + h;
            let plus = f(&theta);
            theta[i] = params[i] - h;
            let minus = f(&theta);
            theta[i] = params[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `max_i |a_i − n_i| / max(|a_i|, |n_i|, floor)`. The floor keeps
/// coordinates whose true gradient is zero from dividing by rounding noise.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic.iter().zip(numeric).map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub params: usize,
}

const OBS: usize = 3;
const ACT: usize = 2;
const BATCH: usize = 4;

fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Critic regression loss on a network with two hidden units per layer.
pub fn critic_check(seed: u64, h: f64) -> GradCheck {
    let mut rng = stream(seed, 0);
    let sizes = [OBS + ACT, 2, 2, 1];
    let critic = Mlp::<f64>::init(&sizes, &mut rng);
    let inputs = normals(&mut rng, BATCH * (OBS + ACT));
    let targets = normals(&mut rng, BATCH);
    let weights: Vec<f64> = (0..BATCH).map(|_| rng.random_range(0.2..1.0)).collect();
    let analytic = critic_loss(&critic, &inputs, &targets, &weights, BATCH).grad;
    let numeric = central_difference(critic.params(), h, |theta| {
        let net = Mlp::from_params(&sizes, theta.to_vec()).expect("same shape");
        critic_loss(&net, &inputs, &targets, &weights, BATCH).loss
    });
    GradCheck { max_rel_error: max_relative_error(&analytic, &numeric, 1e-6), params: analytic.len() }
}

/// Actor loss through fixed critics with fixed reparameterization noise.
pub fn actor_check(seed: u64, h: f64) -> GradCheck {
    let mut rng = stream(seed, 1);
    let policy_sizes = [OBS, 2, 2, 2 * ACT];
    let critic_sizes = [OBS + ACT, 2, 2, 1];
    let policy = PolicyNet::new(Mlp::<f64>::init(&policy_sizes, &mut rng), ACT, -20.0, 2.0);
    let q1 = Mlp::<f64>::init(&critic_sizes, &mut rng);
    let q2 = Mlp::<f64>::init(&critic_sizes, &mut rng);
    let obs = normals(&mut rng, BATCH * OBS);
    let noise = normals(&mut rng, BATCH * ACT);
    let alpha = 0.7;
    let analytic = actor_loss(&policy, &q1, &q2, &obs, &noise, alpha, BATCH).grad;
    let numeric = central_difference(policy.net.params(), h, |theta| {
        let net = PolicyNet::new(Mlp::from_params(&policy_sizes, theta.to_vec()).expect("same shape"), ACT, -20.0, 2.0);
        actor_loss(&net, &q1, &q2, &obs, &noise, alpha, BATCH).loss
    });
    GradCheck { max_rel_error: max_relative_error(&analytic, &numeric, 1e-6), params: analytic.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_of_a_quadratic() {
        let g = central_difference(&[1.0, -2.0], 1e-4, |t| t[0] * t[0] + 3.0 * t[1]);
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn relative_error_uses_floor() {
        assert_eq!(max_relative_error(&[0.0], &[1e-12], 1e-6), 1e-6);
        assert_eq!(max_relative_error(&[2.0], &[1.0], 1e-6), 0.5);
    }

    #[test]
    fn losses_match_finite_differences() {
        for seed in 0..3 {
            let c = critic_check(seed, 1e-5);
            let a = actor_check(seed, 1e-5);
            assert!(c.max_rel_error < 1e-4, "critic seed {seed}: {c:?}");
            assert!(a.max_rel_error < 1e-4, "actor seed {seed}: {a:?}");
        }
    }
}
