//! Estimators used by the oracles: moments, jackknife errors, histograms and
//! distribution distances.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{ensure, Result};

/// Sample mean and unbiased variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, variance: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let variance =
            if n > 1 { samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { n, mean, variance }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Delete-one-block jackknife standard error of the sample mean, with the
/// samples split into `blocks` contiguous groups.
pub fn jackknife_mean_stderr(samples: &[f64], blocks: usize) -> f64 {
    let n = samples.len();
    let blocks = blocks.clamp(2, n.max(2));
    if n < 2 {
        return f64::NAN;
    }
    let total: f64 = samples.iter().sum();
    let size = n / blocks;
    let mut estimates = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * size;
        let hi = if b + 1 == blocks { n } else { lo + size };
        let block_sum: f64 = samples[lo..hi].iter().sum();
        estimates.push((total - block_sum) / (n - (hi - lo)) as f64);
    }
    let m = estimates.iter().sum::<f64>() / blocks as f64;
    let ss: f64 = estimates.iter().map(|e| (e - m) * (e - m)).sum();
    ((blocks - 1) as f64 / blocks as f64 * ss).sqrt()
}

/// Fixed-range histogram with equal-width bins. Samples outside the range
/// are counted separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        ensure(bins >= 1, "bins", bins as f64, "need at least one bin")?;
        ensure(hi > lo, "hi", hi, "range must be non-empty")?;
        Ok(Self { lo, hi, counts: vec![0; bins], outside: 0 })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edge(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.width()
    }

    pub fn add(&mut self, x: f64) {
        if x >= self.lo && x < self.hi {
            let last = self.bins() - 1;
            let i = ((x - self.lo) / self.width()) as usize;
            self.counts[i.min(last)] += 1;
        } else {
            self.outside += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    /// Fraction of all samples (including out-of-range ones) in each bin.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Total-variation distance to a reference distribution given by its bin
    /// probabilities. Out-of-range mass on either side counts as mismatch.
    pub fn total_variation(&self, bin_probs: &[f64]) -> f64 {
        let freqs = self.frequencies();
        let inside: f64 = freqs.iter().zip(bin_probs).map(|(f, p)| (f - p).abs()).sum();
        let out_emp = self.outside as f64 / self.total().max(1) as f64;
        let out_ref = (1.0 - bin_probs.iter().sum::<f64>()).max(0.0);
        0.5 * (inside + (out_emp - out_ref).abs())
    }

    /// Bin probabilities of a continuous density, integrated with a few
    /// Simpson panels per bin.
    pub fn bin_probabilities<F: Fn(f64) -> f64>(&self, density: F) -> Vec<f64> {
        (0..self.bins())
            .map(|i| {
                let (a, b) = (self.edge(i), self.edge(i + 1));
                crate::numeric::adaptive_simpson(&density, a, b, 1e-12)
            })
            .collect()
    }
}

/// Kolmogorov–Smirnov statistic `sup |F_n(x) - F(x)|` of a sample against a
/// reference CDF. Sorts a copy of the sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Binomial standard error `sqrt(p (1 - p) / n)`.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
