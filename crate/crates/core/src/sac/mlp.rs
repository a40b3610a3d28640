//! Fully connected network with tanh hidden layers and a linear head.
//!
//! All weights and biases live in one flat vector so optimizers, soft target
//! updates and checkpoints treat a network as a plain parameter slice.
//! Layer `l` stores its weight as a row-major `in × out` block followed by its
//! `out` biases, so a batch forward is `Y = X·W + b`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::real::{gemm, Real, View};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    params: Vec<T>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    batch: usize,
    acts: Vec<Vec<T>>,
}

impl<T: Copy> Forward<T> {
    pub fn output(&self) -> &[T] {
        self.acts.last().expect("at least the input")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Real> Mlp<T> {
    /// All-zero network with layer widths `sizes` (input first, output last).
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "need input and output widths");
        Mlp { sizes: sizes.to_vec(), params: vec![T::zero(); param_count(sizes)] }
    }

    /// Uniform(±1/√fan_in) initialization for weights and biases.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / num_traits::Float::sqrt(w[0] as f64);
            let n = w[0] * w[1] + w[1];
            for p in &mut net.params[offset..offset + n] {
                *p = T::of(rng.random_range(-bound..bound));
            }
            offset += n;
        }
        net
    }

    pub fn from_params(sizes: &[usize], params: Vec<T>) -> Option<Self> {
        (sizes.len() >= 2 && params.len() == param_count(sizes)).then(|| Mlp { sizes: sizes.to_vec(), params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.sizes.windows(2).map(move |w| {
            let start = offset;
            offset += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    /// Forward pass over `batch` row-major input rows.
    pub fn forward(&self, input: &[T], batch: usize) -> Forward<T> {
        assert_eq!(input.len(), batch * self.input_width(), "input width mismatch");
        let last = self.sizes.len() - 2;
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for (l, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let mut out = Vec::with_capacity(batch * fan_out);
            for _ in 0..batch {
                out.extend_from_slice(b);
            }
            gemm(T::one(), View::rows(&acts[l], batch, fan_in), View::rows(w, fan_in, fan_out), T::one(), &mut out);
            if l != last {
                out.iter_mut().for_each(|y| *y = y.activation());
            }
            acts.push(out);
        }
        Forward { batch, acts }
    }

    /// Back-propagates `d_out` (gradient of the loss w.r.t. the output rows),
    /// accumulating parameter gradients into `grad`. Returns the gradient
    /// w.r.t. the input when `want_input` is set.
    pub fn backward(&self, fwd: &Forward<T>, d_out: &[T], grad: &mut [T], want_input: bool) -> Option<Vec<T>> {
        assert_eq!(grad.len(), self.params.len());
        self.backprop(fwd, d_out, Some(grad), want_input)
    }

    /// Gradient w.r.t. the input rows only.
    pub fn input_gradient(&self, fwd: &Forward<T>, d_out: &[T]) -> Vec<T> {
        self.backprop(fwd, d_out, None, true).expect("input gradient requested")
    }

    fn backprop(&self, fwd: &Forward<T>, d_out: &[T], mut grad: Option<&mut [T]>, want_input: bool) -> Option<Vec<T>> {
        let batch = fwd.batch;
        assert_eq!(d_out.len(), batch * self.output_width());
        let layers: Vec<_> = self.layers().collect();
        let last = layers.len() - 1;
        let mut delta = d_out.to_vec();
        for (l, &(offset, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            if l != last {
                for (d, &y) in delta.iter_mut().zip(&fwd.acts[l + 1]) {
                    *d *= T::one() - y * y;
                }
            }
            if let Some(grad) = grad.as_deref_mut() {
                let x = &fwd.acts[l];
                let (gw, gb) = grad[offset..offset + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
                gemm(T::one(), View::rows(x, batch, fan_in).t(), View::rows(&delta, batch, fan_out), T::one(), gw);
                for row in delta.chunks_exact(fan_out) {
                    for (g, &d) in gb.iter_mut().zip(row) {
                        *g += d;
                    }
                }
            }
            if l > 0 || want_input {
                let w = &self.params[offset..offset + fan_in * fan_out];
                let mut prev = vec![T::zero(); batch * fan_in];
                gemm(T::one(), View::rows(&delta, batch, fan_out), View::rows(w, fan_in, fan_out).t(), T::zero(), &mut prev);
                delta = prev;
            }
        }
        want_input.then_some(delta)
    }
}

/// `θ̄ ← (1 − τ)·θ̄ + τ·θ`, element-wise.
pub fn soft_update<T: Real>(target: &mut [T], online: &[T], tau: f64) {
    assert_eq!(target.len(), online.len());
    let tau = T::of(tau);
    let keep = T::one() - tau;
    for (t, &o) in target.iter_mut().zip(online) {
        *t = keep * *t + tau * o;
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::zeros(&[3, 4, 2]);
        let fwd = net.forward(&[1.0, 2.0, 3.0, -1.0, 0.5, 0.0], 2);
        assert_eq!(fwd.output(), &[0.0; 4]);
    }

    #[test]
    fn forward_matches_manual() {
        let mut rng = stream(1, 0);
        let net = Mlp::<f64>::init(&[2, 3, 1], &mut rng);
        let p = net.params();
        let x = [0.3, -0.7];
        let h: Vec<f64> = (0..3).map(|j| (x[0] * p[j] + x[1] * p[3 + j] + p[6 + j]).tanh()).collect();
        let y = h[0] * p[9] + h[1] * p[10] + h[2] * p[11] + p[12];
        let fwd = net.forward(&x, 1);
        assert!((fwd.output()[0] - y).abs() < 1e-14);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = stream(9, 0);
        let net = Mlp::<f64>::init(&[3, 5, 4, 2], &mut rng);
        let x = [0.1, -0.4, 0.9, 0.5, 0.2, -0.3];
        let w = [0.7, -1.3, 0.25, 2.0];
        let loss = |n: &Mlp<f64>, x: &[f64]| -> f64 { n.forward(x, 2).output().iter().zip(&w).map(|(a, b)| a * b).sum() };
        let fwd = net.forward(&x, 2);
        let mut grad = vec![0.0; net.params().len()];
        let dx = net.backward(&fwd, &w, &mut grad, true).unwrap();
        let h = 1e-6;
        for i in 0..grad.len() {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8, "param {i}: {fd} vs {}", grad[i]);
        }
        for i in 0..x.len() {
            let mut xp = x;
            xp[i] += h;
            let mut xm = x;
            xm[i] -= h;
            let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * h);
            assert!((fd - dx[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn soft_update_formula() {
        let mut t = [0.0f64, 2.0];
        soft_update(&mut t, &[1.0, 4.0], 0.005);
        assert_eq!(t[0], 0.005);
        assert_eq!(t[1], 0.995 * 2.0 + 0.005 * 4.0);
        let mut t = [0.3f64, -7.0];
        soft_update(&mut t, &[1.25, 4.5], 1.0);
        assert_eq!(t, [1.25, 4.5]);
    }
}
