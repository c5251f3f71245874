//! Per-slot leakage estimated from the sufficient statistic of each attack.

use rayon::prelude::*;
use serde::Serialize;

use super::decode::{decode_fcfs_counts, decode_lqf, extract_busy_periods};
use super::entropy_est::{plug_in, weighted_mean, wilson_interval, CountTable, BOOTSTRAP_RESAMPLES, MIN_SAMPLES};
use crate::analytic::{binary_entropy, LeakageKind, LeakageResult, Scheme};
use crate::error::{LeakError, Result};
use crate::sim::{run_simulation, trial_seed, AttackStrategy, Policy, SimConfig, SimOutput, TieBreak};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalLeakage {
    pub result: LeakageResult,
    /// Number of statistic samples the estimate rests on (slots, periods or windows).
    pub samples: usize,
    /// FCFS only: fraction of windows whose count was recovered exactly.
    pub exact_fraction: Option<f64>,
    pub undersampled: bool,
}

/// Slots on which the LQF decoder is expected to be exact: every slot under user-first
/// ties; under attacker-first ties the first user arrival is absorbed silently, so only
/// slots after it count.
pub fn lqf_interior_start(out: &SimOutput, tie_break: TieBreak) -> u64 {
    match tie_break {
        TieBreak::UserFirst => 1,
        TieBreak::AttackerFirst => out
            .arrivals
            .slots()
            .iter()
            .position(|&d| d)
            .map(|i| i as u64 + 2)
            .unwrap_or(1),
    }
}

fn run_trials(config: &SimConfig, trials: u64) -> Result<Vec<SimOutput>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_simulation(&config.clone().with_seed(trial_seed(config.seed, t))))
        .collect()
}

/// Estimates the per-slot leakage of `config` over `trials` independent seeds.
///
/// * LQF with nonstop probing: fraction of correctly decoded slots times `H(lambda)`,
///   with a Wilson interval.
/// * Round robin with nonstop probing, WC-TDMA with odd-slot probing: `H(B)/E[B]` from
///   the pooled busy periods (they are i.i.d.), with a bootstrap interval.
/// * FCFS with periodic sampling: `(exact windows / slots) * H(X | gap)` over the
///   exactly decoded windows, with a bootstrap interval.
pub fn empirical_leakage(config: &SimConfig, trials: u64) -> Result<EmpiricalLeakage> {
    config.validate()?;
    if trials == 0 {
        return Err(LeakError::Config("trials must be at least 1".into()));
    }
    let scheme = Scheme::from_policy(config.policy);
    match (config.policy, config.attacker) {
        (Policy::Lqf, AttackStrategy::NonstopMonitor) => lqf(config, trials),
        (Policy::RoundRobin, AttackStrategy::NonstopMonitor) | (Policy::WcTdma, AttackStrategy::OddSlots) => {
            busy(config, trials, scheme.expect("rr and wctdma have schemes"))
        }
        (Policy::Fcfs, AttackStrategy::PeriodicSampling { omega }) => fcfs(config, trials, omega),
        (p, a) => Err(LeakError::Unsupported(format!(
            "no decoder for {} against {}",
            a.name(),
            p.name()
        ))),
    }
}

fn lqf(config: &SimConfig, trials: u64) -> Result<EmpiricalLeakage> {
    let per_trial: Vec<(u64, u64)> = run_trials(config, trials)?
        .iter()
        .map(|out| {
            let n = config.horizon;
            let decoded = decode_lqf(&out.observation, n)?;
            let start = lqf_interior_start(out, config.tie_break);
            let total = n + 1 - start.min(n + 1);
            let correct = (start..=n).filter(|&t| decoded.at(t) == out.arrivals.at(t)).count() as u64;
            Ok((correct, total))
        })
        .collect::<Result<_>>()?;
    let correct: u64 = per_trial.iter().map(|c| c.0).sum();
    let total: u64 = per_trial.iter().map(|c| c.1).sum();
    let h = binary_entropy(config.lambda)?;
    let frac = if total > 0 { correct as f64 / total as f64 } else { 0.0 };
    let (lo, hi) = wilson_interval(correct, total);
    let result = LeakageResult::new(Scheme::Lqf, config.lambda, LeakageKind::Empirical, frac * h)?.with_ci(lo * h, hi * h);
    Ok(EmpiricalLeakage {
        result,
        samples: total as usize,
        exact_fraction: None,
        undersampled: false,
    })
}

fn busy(config: &SimConfig, trials: u64, scheme: Scheme) -> Result<EmpiricalLeakage> {
    let mut periods = Vec::new();
    for out in run_trials(config, trials)? {
        periods.extend(extract_busy_periods(&out.observation, config.policy)?.periods);
    }
    if periods.len() < MIN_SAMPLES {
        return Err(LeakError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: periods.len(),
        });
    }
    let table = CountTable::from_samples(&periods);
    let rate = |symbols: &[u64], counts: &[u64]| super::entropy_est::miller_madow(counts) / weighted_mean(symbols, counts);
    let bits = rate(&table.symbols, &table.counts);
    let (lo, hi) = table.bootstrap(BOOTSTRAP_RESAMPLES, config.seed, rate);
    let result = LeakageResult::new(scheme, config.lambda, LeakageKind::Empirical, bits)?.with_ci(lo, hi);
    Ok(EmpiricalLeakage {
        result,
        samples: periods.len(),
        exact_fraction: None,
        undersampled: table.distinct() as u64 * 10 > table.total,
    })
}

/// `H(X | T)` from a joint table keyed by `(T << 32) | X`, Miller-Madow corrected in
/// each gap class.
fn conditional_entropy(symbols: &[u64], counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    let mut i = 0;
    while i < symbols.len() {
        let t = symbols[i] >> 32;
        let mut j = i;
        while j < symbols.len() && symbols[j] >> 32 == t {
            j += 1;
        }
        let group = &counts[i..j];
        let m: u64 = group.iter().sum();
        if m > 0 {
            let k = group.iter().filter(|&&c| c > 0).count() as f64;
            let mm = plug_in(group) + (k - 1.0) / (2.0 * m as f64 * std::f64::consts::LN_2);
            h += m as f64 / n as f64 * mm;
        }
        i = j;
    }
    h
}

fn fcfs(config: &SimConfig, trials: u64, omega: f64) -> Result<EmpiricalLeakage> {
    let mut joint = Vec::new();
    let mut windows = 0usize;
    for out in run_trials(config, trials)? {
        let counts = decode_fcfs_counts(&out.observation)?;
        windows += counts.len();
        for k in 0..counts.len() {
            if counts.exact_mask[k] {
                joint.push((counts.gap(k) << 32) | counts.counts[k]);
            }
        }
    }
    let exact = joint.len();
    if exact < MIN_SAMPLES {
        return Err(LeakError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: exact,
        });
    }
    let slots = (config.horizon * trials) as f64;
    let scale = exact as f64 / slots;
    let table = CountTable::from_samples(&joint);
    let bits = scale * conditional_entropy(&table.symbols, &table.counts);
    let (lo, hi) = table.bootstrap(BOOTSTRAP_RESAMPLES, config.seed, |s, c| scale * conditional_entropy(s, c));
    let result = LeakageResult::new(Scheme::Fcfs, config.lambda, LeakageKind::Empirical, bits)?
        .with_omega(omega)
        .with_ci(lo, hi);
    Ok(EmpiricalLeakage {
        result,
        samples: exact,
        exact_fraction: Some(exact as f64 / windows.max(1) as f64),
        undersampled: table.distinct() as u64 * 10 > table.total,
    })
}
