//! Seeded uniform sampling of phase points inside a box, intersected with a
//! domain predicate. Sample `i` uses its own ChaCha stream, so results do not
//! depend on how the work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rejection attempts per sample before giving up.
pub const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub q: Vec<(f64, f64)>,
    pub p: Vec<(f64, f64)>,
    pub t: (f64, f64),
}

impl SampleBox {
    /// Same interval for every coordinate; `t` fixed at zero.
    pub fn uniform(n: usize, q: (f64, f64), p: (f64, f64)) -> Self {
        SampleBox {
            q: vec![q; n],
            p: vec![p; n],
            t: (0.0, 0.0),
        }
    }

    pub fn with_times(mut self, t0: f64, t1: f64) -> Self {
        self.t = (t0, t1);
        self
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
        let x = self
            .q
            .iter()
            .chain(&self.p)
            .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
            .collect();
        let t = if self.t.1 > self.t.0 {
            rng.gen_range(self.t.0..self.t.1)
        } else {
            self.t.0
        };
        (t, x)
    }

    /// Draws `count` `(t, x)` pairs accepted by `accept`.
    pub fn sample<F>(&self, seed: u64, count: usize, accept: F) -> Result<Vec<(f64, Vec<f64>)>>
    where
        F: Fn(f64, &[f64]) -> bool + Sync,
    {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                for _ in 0..MAX_ATTEMPTS {
                    let (t, x) = self.draw(&mut rng);
                    if accept(t, &x) {
                        return Ok((t, x));
                    }
                }
                Err(Error::Sampling(MAX_ATTEMPTS))
            })
            .collect()
    }
}
