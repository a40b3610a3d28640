//! Customer demand generators.

use num_traits::Float;
use rand_distr::{Distribution, Normal, Poisson};

use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemandRegime {
    /// Poisson demand; the high-demand setting uses mean 10.
    HighPoisson { mean: f64 },
    /// Normal demand rounded half away from zero and clamped at 0; the
    /// low-demand setting uses mean 2, std 1.
    LowNormal { mean: f64, std: f64 },
    /// The same quantity every day. Used for scripted checks.
    Constant(u32),
}

impl DemandRegime {
    pub const HIGH: DemandRegime = DemandRegime::HighPoisson { mean: 10.0 };
    pub const LOW: DemandRegime = DemandRegime::LowNormal { mean: 2.0, std: 1.0 };
}

enum Sampler {
    Poisson(Poisson<f64>),
    Normal(Normal<f64>),
    Constant(u32),
}

/// A seeded demand stream. One per environment instance.
pub struct DemandModel {
    regime: DemandRegime,
    sampler: Sampler,
    rng: SimRng,
}

impl DemandModel {
    /// Panics if the regime's distribution parameters are invalid
    /// (non-positive Poisson mean, negative std).
    pub fn new(regime: DemandRegime, rng: SimRng) -> Self {
        let sampler = match regime {
            DemandRegime::HighPoisson { mean } => Sampler::Poisson(Poisson::new(mean).expect("poisson mean must be positive")),
            DemandRegime::LowNormal { mean, std } => Sampler::Normal(Normal::new(mean, std).expect("normal std must be finite and >= 0")),
            DemandRegime::Constant(d) => Sampler::Constant(d),
        };
        Self { regime, sampler, rng }
    }

    pub fn regime(&self) -> DemandRegime {
        self.regime
    }

    pub fn sample(&mut self) -> u32 {
        match &self.sampler {
            Sampler::Poisson(p) => p.sample(&mut self.rng) as u32,
            Sampler::Normal(n) => discretize_normal(n.sample(&mut self.rng)),
            Sampler::Constant(d) => *d,
        }
    }

    /// Draws a raw continuous sample without discretizing. Only meaningful
    /// for the Normal regime; the others return their integer draw.
    pub fn sample_raw(&mut self) -> f64 {
        match &self.sampler {
            Sampler::Normal(n) => n.sample(&mut self.rng),
            _ => self.sample() as f64,
        }
    }
}

/// Round half away from zero, then clamp at zero.
pub fn discretize_normal(raw: f64) -> u32 {
    let rounded = Float::round(raw);
    if rounded <= 0.0 || rounded.is_nan() {
        0
    } else {
        rounded as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use alloc::vec::Vec;

    #[test]
    fn negative_raw_draw_clamps_to_zero() {
        assert_eq!(discretize_normal(-0.4), 0);
        assert_eq!(discretize_normal(-3.0), 0);
        assert_eq!(discretize_normal(0.49), 0);
        assert_eq!(discretize_normal(0.5), 1);
        assert_eq!(discretize_normal(2.5), 3);
    }

    #[test]
    fn same_seed_same_sequence() {
        for regime in [DemandRegime::HIGH, DemandRegime::LOW] {
            let mut a = DemandModel::new(regime, stream(7, 1));
            let mut b = DemandModel::new(regime, stream(7, 1));
            let xs: Vec<u32> = (0..500).map(|_| a.sample()).collect();
            let ys: Vec<u32> = (0..500).map(|_| b.sample()).collect();
            assert_eq!(xs, ys);
        }
    }

    #[test]
    fn constant_regime() {
        let mut m = DemandModel::new(DemandRegime::Constant(10), stream(0, 1));
        assert!((0..10).all(|_| m.sample() == 10));
    }
}
