//! Exhaustive and direct-evaluation oracles for the sampling optimality and
//! convexity statements.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{binomial_entropy, conditional_arrangement_entropy, optimal_sampling_entropy_rate};
use crate::error::{check_prob, LeakError, Result};

pub const MAX_BRUTE_FORCE_HORIZON: u64 = 14;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingOracleReport {
    pub n: u64,
    pub k: u64,
    pub lambda: f64,
    pub patterns_checked: usize,
    /// A maximizing pattern, chosen inside the near-uniform class when possible.
    pub best_pattern: Vec<u64>,
    pub best_entropy: f64,
    /// Gaps `floor(n/k)` first, then `ceil(n/k)`, ending at slot `n`.
    pub uniform_pattern: Vec<u64>,
    pub uniform_entropy: f64,
    /// `k` times the two-point sampling formula at rate `k/n`.
    pub formula_entropy: f64,
    /// Some pattern whose gaps all lie in `{floor(n/k), ceil(n/k)}` and whose last
    /// sample is at `n` attains the maximum.
    pub maximizer_in_class: bool,
    /// Maximizing patterns outside that class (boundary ties), if any.
    pub ties_outside_class: Vec<Vec<u64>>,
}

fn gaps(pattern: &[u64]) -> Vec<u64> {
    let mut prev = 0;
    pattern
        .iter()
        .map(|&a| {
            let g = a - prev;
            prev = a;
            g
        })
        .collect()
}

fn in_class(pattern: &[u64], n: u64, k: u64) -> bool {
    let lo = n / k;
    let hi = n.div_ceil(k);
    pattern.last() == Some(&n) && gaps(pattern).iter().all(|&g| g == lo || g == hi)
}

fn combinations(n: u64, k: u64) -> Vec<Vec<u64>> {
    fn rec(start: u64, n: u64, k: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() as u64 == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len() as u64;
        for a in start..=(n + 1 - need) {
            cur.push(a);
            rec(a + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Joint entropy of `(N(A_1), ..., N(A_k))` for every sampling pattern of `k` slots in
/// `1..=n`, by summing the probability of all `2^n` arrival strings into buckets.
pub fn brute_force_sampling_entropy(n: u64, k: u64, lambda: f64) -> Result<SamplingOracleReport> {
    check_prob("lambda", lambda)?;
    if n == 0 || n > MAX_BRUTE_FORCE_HORIZON {
        return Err(LeakError::Domain {
            name: "n",
            value: n as f64,
            range: "1..=14",
        });
    }
    if k == 0 || k > n {
        return Err(LeakError::Domain {
            name: "k",
            value: k as f64,
            range: "1..=n",
        });
    }
    let strings = 1usize << n;
    let mut prob = Vec::with_capacity(strings);
    let mut prefix = Vec::with_capacity(strings);
    for s in 0..strings {
        let ones = (s as u64).count_ones() as i32;
        prob.push(lambda.powi(ones) * (1.0 - lambda).powi(n as i32 - ones));
        // prefix[s][t] = arrivals in slots 1..=t, slot t is bit t-1
        let mut cum = vec![0u8; n as usize + 1];
        for t in 1..=n as usize {
            cum[t] = cum[t - 1] + ((s >> (t - 1)) & 1) as u8;
        }
        prefix.push(cum);
    }

    let patterns = combinations(n, k);
    let entropies: Vec<f64> = patterns
        .par_iter()
        .map(|pat| {
            let mut buckets: HashMap<u64, f64> = HashMap::with_capacity(1 << k.min(12));
            for s in 0..strings {
                let key = pat
                    .iter()
                    .fold(0u64, |acc, &a| (acc << 4) | prefix[s][a as usize] as u64);
                *buckets.entry(key).or_insert(0.0) += prob[s];
            }
            let mut values: Vec<f64> = buckets.into_values().collect();
            values.sort_by(f64::total_cmp);
            values.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
        })
        .collect();

    let best_entropy = entropies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let maximizers: Vec<usize> = (0..patterns.len())
        .filter(|&i| entropies[i] >= best_entropy - TIE_TOL)
        .collect();
    let in_class_max = maximizers.iter().find(|&&i| in_class(&patterns[i], n, k));
    let ties_outside_class: Vec<Vec<u64>> = maximizers
        .iter()
        .filter(|&&i| !in_class(&patterns[i], n, k))
        .map(|&i| patterns[i].clone())
        .collect();
    let best_i = in_class_max.copied().unwrap_or(maximizers[0]);

    let short = n / k;
    let n_long = n - short * k;
    let mut uniform_pattern = Vec::with_capacity(k as usize);
    let mut t = 0;
    for j in 0..k {
        t += if j < k - n_long { short } else { short + 1 };
        uniform_pattern.push(t);
    }
    let uniform_i = patterns.iter().position(|p| *p == uniform_pattern).expect("uniform pattern enumerated");
    let formula_entropy = k as f64 * optimal_sampling_entropy_rate(k as f64 / n as f64, lambda)?;

    Ok(SamplingOracleReport {
        n,
        k,
        lambda,
        patterns_checked: patterns.len(),
        best_pattern: patterns[best_i].clone(),
        best_entropy,
        uniform_pattern,
        uniform_entropy: entropies[uniform_i],
        formula_entropy,
        maximizer_in_class: in_class_max.is_some(),
        ties_outside_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub lambda: f64,
    pub i_max: u64,
    pub pairs_checked: usize,
    /// Largest amount by which the right side exceeds the left (positive = violation).
    pub max_violation: f64,
    /// Pairs violating by more than `1e-10`.
    pub violations: usize,
    /// Largest `|lhs - rhs|` over the equality cases `b in {a, a+1}`.
    pub max_equality_gap: f64,
}

/// Checks `H(a) + H(b) >= H(floor((a+b)/2)) + H(ceil((a+b)/2))` for the arrangement
/// entropy on all `1 <= a <= b <= i_max`.
pub fn midpoint_convexity_check(lambda: f64, i_max: u64) -> Result<ConvexityReport> {
    if i_max == 0 || i_max > 60 {
        return Err(LeakError::Domain {
            name: "i_max",
            value: i_max as f64,
            range: "1..=60",
        });
    }
    let h: Vec<f64> = (0..=i_max)
        .map(|i| if i == 0 { Ok(0.0) } else { conditional_arrangement_entropy(i, lambda) })
        .collect::<Result<_>>()?;
    let mut report = ConvexityReport {
        lambda,
        i_max,
        pairs_checked: 0,
        max_violation: f64::NEG_INFINITY,
        violations: 0,
        max_equality_gap: 0.0,
    };
    for a in 1..=i_max {
        for b in a..=i_max {
            let lhs = h[a as usize] + h[b as usize];
            let rhs = h[((a + b) / 2) as usize] + h[(a + b).div_ceil(2) as usize];
            let v = rhs - lhs;
            report.pairs_checked += 1;
            report.max_violation = report.max_violation.max(v);
            if v > 1e-10 {
                report.violations += 1;
            }
            if b <= a + 1 {
                report.max_equality_gap = report.max_equality_gap.max(v.abs());
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationConvexityReport {
    pub lambda: f64,
    pub i_max: u64,
    pub points: usize,
    /// Smallest second difference of the piecewise-linear interpolant on the grid.
    pub min_second_difference: f64,
}

/// Second differences of the piecewise-linear interpolant of the arrangement entropy
/// on `[1, i_max]`, sampled `per_unit` times per unit interval.
pub fn interpolation_convexity_check(lambda: f64, i_max: u64, per_unit: u64) -> Result<InterpolationConvexityReport> {
    if i_max < 2 || per_unit == 0 {
        return Err(LeakError::Domain {
            name: "i_max",
            value: i_max as f64,
            range: ">= 2",
        });
    }
    let h: Vec<f64> = (1..=i_max)
        .map(|i| conditional_arrangement_entropy(i, lambda))
        .collect::<Result<_>>()?;
    let f = |x: f64| {
        let lo = x.floor().clamp(1.0, (i_max - 1) as f64);
        let theta = x - lo;
        let i = lo as usize - 1;
        (1.0 - theta) * h[i] + theta * h[i + 1]
    };
    let step = 1.0 / per_unit as f64;
    let points = ((i_max - 1) * per_unit) as usize + 1;
    let xs: Vec<f64> = (0..points).map(|j| 1.0 + j as f64 * step).collect();
    let min_second_difference = xs
        .windows(3)
        .map(|w| f(w[0]) - 2.0 * f(w[1]) + f(w[2]))
        .fold(f64::INFINITY, f64::min);
    Ok(InterpolationConvexityReport {
        lambda,
        i_max,
        points,
        min_second_difference,
    })
}

/// `sum_j H(Bin(g_j, lambda))` for a gap sequence: the closed form of a pattern's
/// joint count entropy, for comparison with the enumeration.
pub fn pattern_entropy_closed_form(pattern: &[u64], lambda: f64) -> Result<f64> {
    gaps(pattern).into_iter().map(|g| binomial_entropy(g, lambda)).sum()
}
