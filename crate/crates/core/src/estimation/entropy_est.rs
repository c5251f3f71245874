//! Plug-in entropy estimation with bias correction and bootstrap intervals.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::analytic::BusyPeriodDist;
use crate::error::{LeakError, Result};

pub const MIN_SAMPLES: usize = 10_000;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Empirical distribution of a discrete sample, symbols in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CountTable {
    pub symbols: Vec<u64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CountTable {
    pub fn from_samples(samples: &[u64]) -> Self {
        let mut map = BTreeMap::new();
        for &s in samples {
            *map.entry(s).or_insert(0u64) += 1;
        }
        let (symbols, counts): (Vec<u64>, Vec<u64>) = map.into_iter().unzip();
        CountTable {
            symbols,
            total: samples.len() as u64,
            counts,
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn probability(&self, symbol: u64) -> f64 {
        match self.symbols.binary_search(&symbol) {
            Ok(i) => self.counts[i] as f64 / self.total as f64,
            Err(_) => 0.0,
        }
    }

    pub fn plug_in_entropy(&self) -> f64 {
        plug_in(&self.counts)
    }

    /// Plug-in entropy plus `(K - 1)/(2 N ln 2)`, with `K` the number of observed symbols.
    pub fn miller_madow_entropy(&self) -> f64 {
        miller_madow(&self.counts)
    }

    pub fn mean(&self) -> f64 {
        weighted_mean(&self.symbols, &self.counts)
    }

    /// Percentile interval (2.5%, 97.5%) of `stat` over multinomial resamples of the counts.
    pub fn bootstrap<F>(&self, resamples: usize, seed: u64, stat: F) -> (f64, f64)
    where
        F: Fn(&[u64], &[u64]) -> f64,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<f64> = (0..resamples)
            .map(|_| {
                let counts = multinomial(&self.counts, self.total, &mut rng);
                stat(&self.symbols, &counts)
            })
            .collect();
        values.sort_by(f64::total_cmp);
        percentile_interval(&values)
    }
}

pub(crate) fn plug_in(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

pub(crate) fn miller_madow(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let k = counts.iter().filter(|&&c| c > 0).count() as f64;
    plug_in(counts) + (k - 1.0) / (2.0 * n as f64 * std::f64::consts::LN_2)
}

pub(crate) fn weighted_mean(symbols: &[u64], counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    symbols.iter().zip(counts).map(|(&s, &c)| s as f64 * c as f64).sum::<f64>() / n as f64
}

/// Draws multinomial counts with the cell probabilities `counts / total`, one
/// conditional binomial per cell.
fn multinomial(counts: &[u64], total: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut left = total;
    let mut mass_left = total;
    counts
        .iter()
        .map(|&c| {
            if left == 0 || mass_left == 0 {
                return 0;
            }
            let p = (c as f64 / mass_left as f64).min(1.0);
            mass_left -= c;
            let draw = if p >= 1.0 {
                left
            } else {
                Binomial::new(left, p).map(|b| b.sample(rng)).unwrap_or(0)
            };
            left -= draw;
            draw
        })
        .collect()
}

fn percentile_interval(sorted: &[f64]) -> (f64, f64) {
    if sorted.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let at = |q: f64| {
        let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
        sorted[idx]
    };
    (at(0.025), at(0.975))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// Bias-corrected estimate, bits per sample.
    pub bits: f64,
    pub plug_in: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub distinct: usize,
    /// More than one distinct symbol per ten samples.
    pub undersampled: bool,
}

/// Miller-Madow corrected plug-in entropy of an i.i.d. sample, with a bootstrap
/// interval from [`BOOTSTRAP_RESAMPLES`] multinomial resamples seeded by `seed`.
pub fn empirical_entropy_rate(samples: &[u64], seed: u64) -> Result<EntropyEstimate> {
    if samples.len() < MIN_SAMPLES {
        return Err(LeakError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    Ok(estimate_from_table(&CountTable::from_samples(samples), seed))
}

pub(crate) fn estimate_from_table(table: &CountTable, seed: u64) -> EntropyEstimate {
    let distinct = table.distinct();
    let undersampled = distinct as u64 * 10 > table.total;
    if undersampled {
        log::warn!(
            "entropy estimate is undersampled: {distinct} distinct symbols in {} samples",
            table.total
        );
    }
    let (ci_low, ci_high) = table.bootstrap(BOOTSTRAP_RESAMPLES, seed, |_, c| miller_madow(c));
    EntropyEstimate {
        bits: table.miller_madow_entropy(),
        plug_in: table.plug_in_entropy(),
        ci_low,
        ci_high,
        samples: table.total as usize,
        distinct,
        undersampled,
    }
}

/// Total-variation distance between an empirical sample of busy periods and a
/// (truncated) model distribution. Model tail mass counts as disagreement.
pub fn total_variation(sample: &CountTable, model: &BusyPeriodDist) -> f64 {
    let mut diff = 0.0;
    let mut model_seen = 0.0;
    for (&b, &c) in sample.symbols.iter().zip(&sample.counts) {
        let p = model.prob(b);
        model_seen += p;
        diff += (c as f64 / sample.total as f64 - p).abs();
    }
    let model_total: f64 = model.probs.iter().sum();
    diff += (model_total - model_seen).max(0.0) + model.truncation_mass;
    0.5 * diff
}

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
