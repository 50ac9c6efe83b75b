//! Seeded, reproducible random streams.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::CVector;

/// Deterministic stream of uniform reals and unit directions.
///
/// Value-typed: cloning copies the stream position, and [`Sampler::fork`]
/// derives an independent stream from the same seed.
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream keyed by `stream`; the parent is not advanced.
    pub fn fork(&self, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        Sampler { seed: self.seed, rng }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn unit_phase(&mut self) -> Complex<f64> {
        Complex::from_polar(1.0, std::f64::consts::TAU * self.uniform())
    }

    /// Uniform direction on the unit sphere of `C^n = R^{2n}`.
    pub fn unit_direction(&mut self, n: usize) -> CVector {
        loop {
            let v = CVector::from_fn(n, |_| Complex::new(self.normal(), self.normal()));
            if let Some(u) = v.normalized() {
                return u;
            }
        }
    }

    /// Uniform direction on the unit sphere of `R^n`.
    pub fn real_direction(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Sampler::new(42);
        let mut b = Sampler::new(42);
        for _ in 0..1000 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn directions_are_unit() {
        let mut s = Sampler::new(3);
        for n in 1..5 {
            for _ in 0..200 {
                assert!((s.unit_direction(n).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_mean_is_half() {
        let mut s = Sampler::new(11);
        let mean = (0..100_000).map(|_| s.uniform()).sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn forks_are_independent() {
        let base = Sampler::new(5);
        let mut f1 = base.fork(1);
        let mut f2 = base.fork(2);
        let a: Vec<f64> = (0..8).map(|_| f1.uniform()).collect();
        let b: Vec<f64> = (0..8).map(|_| f2.uniform()).collect();
        assert_ne!(a, b);
        let mut again = base.fork(1);
        assert_eq!(a[0], again.uniform());
    }
}
