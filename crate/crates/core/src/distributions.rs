//! Reference distributions and deterministic sampling streams.
//!
//! Sampling is inverse-CDF throughout: every draw consumes exactly one
//! 64-bit word from its stream, so parallel splitting never changes the
//! values a given (seed, stream) pair produces.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_quantile};

/// A continuous distribution family usable as a test reference or a
/// simulation sampling law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousDist {
    /// Uniform on [0, 1].
    Uniform01,
    /// Normal with mean `mu` and standard deviation `sigma > 0`.
    Normal { mu: f64, sigma: f64 },
    /// Exponential with rate `rate > 0`.
    Exponential { rate: f64 },
}

impl ContinuousDist {
    pub fn uniform01() -> Self {
        ContinuousDist::Uniform01
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::NonFiniteArgument {
                name: "mu",
                value: mu,
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "normal sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(ContinuousDist::Normal { mu, sigma })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "exponential rate must be positive and finite, got {rate}"
            )));
        }
        Ok(ContinuousDist::Exponential { rate })
    }

    /// Distribution function at `x`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteArgument {
                name: "x",
                value: x,
            });
        }
        Ok(match *self {
            ContinuousDist::Uniform01 => x.clamp(0.0, 1.0),
            ContinuousDist::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            ContinuousDist::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        })
    }

    /// Inverse CDF for a uniform draw `u`.
    fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            ContinuousDist::Uniform01 => u,
            ContinuousDist::Normal { mu, sigma } => mu + sigma * norm_quantile(u),
            ContinuousDist::Exponential { rate } => -(1.0 - u).ln() / rate,
        }
    }

    /// Draw `count` i.i.d. values from the stream in `rng`.
    pub fn sample(&self, count: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidConfig(
                "sample count must be at least 1".to_owned(),
            ));
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u = match self {
                // The normal quantile diverges at 0, so feed it an open
                // interval; the other families are fine on [0, 1).
                ContinuousDist::Normal { .. } => rng.next_open01(),
                _ => rng.next_uniform(),
            };
            out.push(self.inverse_cdf(u));
        }
        Ok(out)
    }
}

/// A reproducible random stream addressed by `(master_seed, stream_index)`.
///
/// Streams with distinct indices are statistically independent, and the
/// sequence for a given pair is identical across platforms and thread
/// schedules. Child streams derived with [`SeededRng::substream`] inherit
/// the master seed and mix the child index into the stream address.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_index: u64,
    chacha: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut chacha = ChaCha8Rng::seed_from_u64(master_seed);
        chacha.set_stream(stream_index);
        SeededRng {
            master_seed,
            stream_index,
            chacha,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// A fresh stream for logical child `child`, independent of this one.
    pub fn substream(&self, child: u64) -> SeededRng {
        SeededRng::new(self.master_seed, child_stream(self.stream_index, child))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

/// SplitMix64 finalizer; bijective on u64.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream address for child `child` of stream `parent`.
pub fn child_stream(parent: u64, child: u64) -> u64 {
    splitmix64(parent ^ splitmix64(child))
}

/// A seed from OS entropy, for callers that did not supply one.
pub fn fresh_seed() -> u64 {
    rand::random()
}
