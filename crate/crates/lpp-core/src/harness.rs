//! Seeded randomness and Monte Carlo aggregation.
//!
//! Every simulator draws from an [`RngStream`], a ChaCha8 generator addressed by
//! `(seed, stream_index)`. Replicas are mapped to consecutive stream indices, so
//! the randomness a replica sees is a pure function of its index and the results
//! do not depend on how the work is scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// A reproducible random stream addressed by a seed and a stream index.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Opens stream `stream_index` of the generator keyed by `seed`.
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self { seed, stream_index, rng }
    }

    /// Seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of this stream under its seed.
    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Derives an independent child stream, keyed by this stream's seed and index.
    ///
    /// The child seed mixes the parent coordinates with `tag`, so children of
    /// distinct parents or distinct tags do not overlap.
    pub fn derive(&self, tag: u64) -> Self {
        let mixed = splitmix64(self.seed ^ splitmix64(self.stream_index.wrapping_add(0x9E37_79B9)));
        Self::new(mixed, tag)
    }

    /// Uniform draw on the half-open interval `(0, 1]`.
    ///
    /// Excluding zero keeps `ln U` finite for inversion samplers.
    pub fn uniform_pos(&mut self) -> f64 {
        // 53 random mantissa bits, shifted by one ulp so 0 is impossible and 1 is attainable.
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Exponential draw with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform_pos().ln() / rate
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Lemire's multiply-shift with rejection, exact for every n.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.rng.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Geometric variable on `{1, 2, ...}` with success probability `p`.
///
/// Uses inversion, `ceil(ln U / ln(1-p))`, so one uniform is consumed per draw.
pub fn sample_geometric(p: f64, rng: &mut RngStream) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("geometric parameter {p} outside (0, 1]")));
    }
    Ok(geometric_unchecked(p, rng))
}

/// Inversion sampler without the parameter check, for hot loops that validated `p` once.
#[inline]
pub(crate) fn geometric_unchecked(p: f64, rng: &mut RngStream) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = rng.uniform_pos();
    let k = (u.ln() / (-p).ln_1p()).ceil();
    if k < 1.0 {
        1
    } else if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// Mean, variance and normal-approximation 95% half-width of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSummary {
    /// Number of replicas.
    pub n: usize,
    /// Sample mean.
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `1.96 * sqrt(variance / n)`.
    pub ci95_halfwidth: f64,
}

impl MonteCarloSummary {
    /// Summarizes `samples` in index order; at least two samples are required.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(invalid(format!("need at least 2 samples, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let variance = (ss / (n - 1) as f64).max(0.0);
        Ok(Self { n, mean, variance, ci95_halfwidth: 1.96 * (variance / n as f64).sqrt() })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// True if `value` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error()
    }

    /// True if the interval `[lo, hi]` comes within `k` standard errors of the mean.
    pub fn overlaps(&self, lo: f64, hi: f64, k: f64) -> bool {
        self.mean + k * self.std_error() >= lo && self.mean - k * self.std_error() <= hi
    }
}

/// Joint test that two estimates agree within `k` combined standard errors.
pub fn agree_within(a: &MonteCarloSummary, b: &MonteCarloSummary, k: f64) -> bool {
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    (a.mean - b.mean).abs() <= k * se
}

/// Runs `n` replicas of `task` on streams `(seed, 0..n)` and collects results in index order.
pub fn replicate<T, F>(n: usize, seed: u64, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| task(&mut RngStream::new(seed, i)))
        .collect()
}

/// Runs `n` replicas of a real-valued task and summarizes them.
///
/// Reduction happens sequentially over the index-ordered results, so the
/// summary is bit-identical for a given `(seed, n)` regardless of thread count.
pub fn run_replicas<F>(task: F, n: usize, seed: u64) -> Result<MonteCarloSummary>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    if n < 2 {
        return Err(invalid(format!("replica count must be at least 2, got {n}")));
    }
    MonteCarloSummary::from_samples(&replicate(n, seed, task))
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance between empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().cdf(x)
}
