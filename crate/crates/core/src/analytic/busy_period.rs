//! Busy periods seen by a nonstop prober.
//!
//! Between two probes that find the user queue empty, the user queue follows a
//! birth-death chain observed once per probe: from 0 it jumps to 1 with probability
//! `lambda` (otherwise the period ends after one step), and from `i >= 1` it moves
//! down with `(1-lambda)^2`, stays with `2 lambda (1-lambda)` and moves up with
//! `lambda^2`. The number of probes `s` in a period is the first return time to 0.
//! Under round robin each period lasts `2s - 1` slots, under WC-TDMA `2s` slots.

use serde::Serialize;

use super::entropy::xlog2x;
use crate::error::{LeakError, Result};

/// Upper bound on DP steps.
pub const MAX_STEPS: usize = 1_000_000;
/// Default tail mass at which the DP stops.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;
/// Chain states whose mass falls below this are dropped (and counted as tail).
const PRUNE_MASS: f64 = 1e-40;

/// Which scheduler the period lengths are expressed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BusyScale {
    /// `B = 2s - 1`
    RoundRobin,
    /// `B' = 2s`
    WcTdma,
}

impl BusyScale {
    pub fn slots(self, steps: u64) -> u64 {
        match self {
            BusyScale::RoundRobin => 2 * steps - 1,
            BusyScale::WcTdma => 2 * steps,
        }
    }
}

/// Truncated distribution of a busy period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusyPeriodDist {
    pub lambda: f64,
    pub scale: BusyScale,
    /// Period lengths in slots, increasing.
    pub support: Vec<u64>,
    pub probs: Vec<f64>,
    /// Probability mass not represented in `probs`.
    pub truncation_mass: f64,
    /// Mean over the represented part, `sum b p_b`.
    pub mean: f64,
    /// Entropy of the represented part, `-sum p_b log2 p_b`, in bits.
    pub entropy: f64,
    /// Upper bound on the entropy carried by the discarded tail.
    pub entropy_error: f64,
}

impl BusyPeriodDist {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `s` probes (1-based), zero beyond the truncation point.
    pub fn step_prob(&self, s: u64) -> f64 {
        self.probs.get((s as usize).wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    /// Probability of a period of `b` slots.
    pub fn prob(&self, b: u64) -> f64 {
        let s = match self.scale {
            BusyScale::RoundRobin if b % 2 == 1 => (b + 1) / 2,
            BusyScale::WcTdma if b % 2 == 0 && b > 0 => b / 2,
            _ => return 0.0,
        };
        self.step_prob(s)
    }

    /// Same distribution with lengths expressed for `scale`.
    pub fn rescaled(&self, scale: BusyScale) -> BusyPeriodDist {
        let support: Vec<u64> = (1..=self.probs.len() as u64).map(|s| scale.slots(s)).collect();
        let mean = support.iter().zip(&self.probs).map(|(&b, p)| b as f64 * p).sum();
        BusyPeriodDist {
            support,
            mean,
            scale,
            ..self.clone()
        }
    }

    /// Closed-form mean of the untruncated distribution: `1/(1-2 lambda)` for round
    /// robin and `(2-2 lambda)/(1-2 lambda)` for WC-TDMA.
    pub fn exact_mean(&self) -> f64 {
        let l = self.lambda;
        match self.scale {
            BusyScale::RoundRobin => 1.0 / (1.0 - 2.0 * l),
            BusyScale::WcTdma => (2.0 - 2.0 * l) / (1.0 - 2.0 * l),
        }
    }

    /// Estimate of `sum_{tail} b p_b` by extending the last PMF ratio geometrically.
    pub fn tail_mean_estimate(&self) -> f64 {
        let n = self.probs.len();
        if self.truncation_mass <= 0.0 || n < 2 {
            return 0.0;
        }
        let r = self.probs[n - 1] / self.probs[n - 2];
        if !(r > 0.0 && r < 1.0) {
            return f64::INFINITY;
        }
        // tail on steps n+1, n+2, ... with mass tau and geometric ratio r
        let tau = self.truncation_mass;
        let mean_steps = n as f64 + 1.0 / (1.0 - r);
        match self.scale {
            BusyScale::RoundRobin => tau * (2.0 * mean_steps - 1.0),
            BusyScale::WcTdma => tau * 2.0 * mean_steps,
        }
    }
}

/// Mean number of probes per busy period, `(1-lambda)/(1-2 lambda)`.
pub fn mean_steps(lambda: f64) -> f64 {
    (1.0 - lambda) / (1.0 - 2.0 * lambda)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda < 0.5 {
        Ok(())
    } else {
        Err(LeakError::Domain {
            name: "lambda",
            value: lambda,
            range: "[0, 0.5)",
        })
    }
}

/// First-passage PMF by dynamic programming over the chain, in round-robin slots.
/// Stops once the undelivered mass drops below `tail_eps` or after [`MAX_STEPS`] steps.
pub fn busy_period_pmf(lambda: f64, tail_eps: f64) -> Result<BusyPeriodDist> {
    check_lambda(lambda)?;
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(LeakError::Domain {
            name: "tail_eps",
            value: tail_eps,
            range: "(0, 1)",
        });
    }
    let down = (1.0 - lambda) * (1.0 - lambda);
    let stay = 2.0 * lambda * (1.0 - lambda);
    let up = lambda * lambda;

    let mut probs = vec![1.0 - lambda];
    // mass[i] = probability of being in state i+1 after the current step without having returned
    let mut mass = vec![lambda];
    let mut next = Vec::new();
    let mut pruned = 0.0f64;
    let mut live: f64 = lambda;

    while live + pruned >= tail_eps && probs.len() < MAX_STEPS {
        probs.push(mass[0] * down);
        next.clear();
        next.resize(mass.len() + 1, 0.0);
        for (i, &m) in mass.iter().enumerate() {
            if i > 0 {
                next[i - 1] += m * down;
            }
            next[i] += m * stay;
            next[i + 1] += m * up;
        }
        while let Some(&last) = next.last() {
            if last < PRUNE_MASS && next.len() > 1 {
                pruned += last;
                next.pop();
            } else {
                break;
            }
        }
        std::mem::swap(&mut mass, &mut next);
        live = mass.iter().sum();
    }
    if probs.len() >= MAX_STEPS {
        log::warn!(
            "busy-period DP hit {MAX_STEPS} steps at lambda = {lambda}; tail mass {:e}",
            live + pruned
        );
    }
    let truncation_mass = live + pruned;
    Ok(finish(lambda, probs, truncation_mass))
}

fn finish(lambda: f64, probs: Vec<f64>, truncation_mass: f64) -> BusyPeriodDist {
    let scale = BusyScale::RoundRobin;
    let support: Vec<u64> = (1..=probs.len() as u64).map(|s| scale.slots(s)).collect();
    let mean = support.iter().zip(&probs).map(|(&b, p)| b as f64 * p).sum();
    let entropy = probs.iter().map(|&p| xlog2x(p)).sum();
    let entropy_error = tail_entropy_bound(lambda, &probs, truncation_mass);
    BusyPeriodDist {
        lambda,
        scale,
        support,
        probs,
        truncation_mass,
        mean,
        entropy,
        entropy_error,
    }
}

/// Bound on `-sum_{s>N} p_s log2 p_s` for a tail of mass `tau` on steps beyond `N`.
///
/// Writing the tail as `tau` times a conditional law on `{N+1, N+2, ...}` whose mean
/// excess over `N+1` is `m`, the tail entropy is `tau H(cond) + tau log2(1/tau)`, and a
/// law on the nonnegative integers with mean `m` has entropy at most `log2(e (m+1))`.
/// The conditional mean comes from the known mean `(1-lambda)/(1-2 lambda)`.
fn tail_entropy_bound(lambda: f64, probs: &[f64], tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let n = probs.len() as f64;
    let partial: f64 = probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    let tail_moment = (mean_steps(lambda) - partial).max(tau * (n + 1.0));
    let excess = (tail_moment / tau - (n + 1.0)).max(0.0);
    tau * (std::f64::consts::E * (excess + 1.0)).log2() + tau * (1.0 / tau).log2()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Path-counting form of `P(s = r)`: `lambda (1-lambda)^2` times the weight of all
/// excursions of `r-2` inner steps that stay at or above state 1, summed over the
/// number `j >= 0` of up/down pairs (Catalan-many orderings each).
pub fn busy_period_prob_catalan(lambda: f64, r: u64) -> Result<f64> {
    check_lambda(lambda)?;
    if r == 0 {
        return Ok(0.0);
    }
    if r == 1 {
        return Ok(1.0 - lambda);
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let n = r - 2;
    let ln_pair = 2.0 * lambda.ln() + 2.0 * (1.0 - lambda).ln();
    let ln_stay = (2.0 * lambda * (1.0 - lambda)).ln();
    let ln_nf = ln_factorial(n);
    let mut sum = 0.0;
    for j in 0..=n / 2 {
        // C(n, 2j) * Catalan(j) = n! / ((n-2j)! j! (j+1)!)
        let ln_w = ln_nf - ln_factorial(n - 2 * j) - ln_factorial(j) - ln_factorial(j + 1);
        sum += (ln_w + j as f64 * ln_pair + (n - 2 * j) as f64 * ln_stay).exp();
    }
    Ok(lambda * (1.0 - lambda) * (1.0 - lambda) * sum)
}

/// The closed form exactly as printed alongside the round-robin bound:
/// `2^{r-1} lambda^{r-1} (1-lambda)^r max{ sum_{j=1}^{floor((r-2)/2)} (r-2)! 2^{-2j-1} / ((r-2-2j)! j! (j+1)!), 1 }`
/// for `B = 2r - 1`. Kept verbatim for cross-checking; it disagrees with the chain for
/// every `r >= 2`.
pub fn busy_period_prob_printed(lambda: f64, r: u64) -> Result<f64> {
    check_lambda(lambda)?;
    if r == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    if r >= 4 {
        let n = r - 2;
        let ln_nf = ln_factorial(n);
        for j in 1..=n / 2 {
            let ln_t = ln_nf
                - ln_factorial(n - 2 * j)
                - ln_factorial(j)
                - ln_factorial(j + 1)
                - (2 * j + 1) as f64 * std::f64::consts::LN_2;
            sum += ln_t.exp();
        }
    }
    let prefactor = 2f64.powi(r as i32 - 1) * lambda.powi(r as i32 - 1) * (1.0 - lambda).powi(r as i32);
    Ok(prefactor * sum.max(1.0))
}

/// One row of the printed-versus-chain comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormDiscrepancy {
    pub r: u64,
    pub dp: f64,
    pub catalan: f64,
    pub printed: f64,
}

/// Compares the DP, path-counting and printed forms for `r = 1..=r_max`.
pub fn closed_form_discrepancies(lambda: f64, r_max: u64) -> Result<Vec<ClosedFormDiscrepancy>> {
    let dist = busy_period_pmf(lambda, DEFAULT_TAIL_EPS)?;
    (1..=r_max)
        .map(|r| {
            Ok(ClosedFormDiscrepancy {
                r,
                dp: dist.step_prob(r),
                catalan: busy_period_prob_catalan(lambda, r)?,
                printed: busy_period_prob_printed(lambda, r)?,
            })
        })
        .collect()
}
