use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton points on the `dim`-torus under a seeded Cranley-Patterson
/// rotation. Point `i` depends only on `(seed, i)`.
#[derive(Clone, Debug)]
pub struct TorusStarts {
    shift: Vec<f64>,
}

impl TorusStarts {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} torus dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TorusStarts {
            shift: (0..dim).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(shift, p)| TAU * (radical_inverse(i as u64 + 1, p) + shift).fract())
            .collect()
    }
}
