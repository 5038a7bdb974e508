//! Random variate generation by inversion with a growable cdf cache.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded explicitly:
//! the same seed always reproduces the same stream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::Ecomp;
use crate::error::{Error, Result};

/// Probability mass beyond which the cdf cache is considered complete.
const CDF_COMPLETE: f64 = 1.0 - 1e-12;

/// Inversion sampler for an [`Ecomp`] distribution.
///
/// Draws are by inversion: for uniform u, the smallest k with cdf(k) ≥ u.
/// The cdf cache is extended on demand through the probability recurrence
/// and never changes once written, so a seed fully determines the stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: Ecomp,
    rng: ChaCha8Rng,
    cdf: Vec<f64>,
    next_pmf: f64,
}

impl Sampler {
    pub fn new(dist: Ecomp, seed: u64) -> Self {
        let p0 = dist.pmf(0);
        Sampler {
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cdf: vec![p0],
            next_pmf: p0,
        }
    }

    pub fn dist(&self) -> &Ecomp {
        &self.dist
    }

    /// One draw.
    pub fn draw(&mut self) -> Result<u64> {
        let u: f64 = self.rng.random();
        // partition_point returns the count of entries < u, which is the
        // smallest index with cdf[k] >= u.
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx < self.cdf.len() {
            return Ok(idx as u64);
        }
        self.extend_until(u)
    }

    /// n independent draws.
    pub fn sample(&mut self, n: usize) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.draw()?);
        }
        Ok(out)
    }

    fn extend_until(&mut self, u: f64) -> Result<u64> {
        loop {
            let last = *self.cdf.last().expect("cache is never empty");
            if last >= u {
                return Ok(self.cdf.len() as u64 - 1);
            }
            if last >= CDF_COMPLETE {
                // u fell in the sliver beyond achievable coverage; clamp to
                // the deepest cached state.
                return Ok(self.cdf.len() as u64 - 1);
            }
            if self.cdf.len() >= self.dist.config().max_terms {
                return Err(Error::NonConvergent {
                    max_terms: self.dist.config().max_terms,
                    last_ratio: self.dist.pmf_ratio(self.cdf.len() as u64 - 1),
                    at: self.cdf.len(),
                });
            }
            let k = self.cdf.len() as u64 - 1;
            self.next_pmf = self.dist.pmf_recurrence_step(k, self.next_pmf);
            self.cdf.push((last + self.next_pmf).min(1.0));
        }
    }
}
