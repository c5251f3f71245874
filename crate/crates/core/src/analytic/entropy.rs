//! Entropies of Bernoulli and binomial variables, in bits.

use rand::Rng;

use crate::error::{check_open_unit, check_prob, LeakError, Result};

/// Relative tolerance for treating `1/omega` as an integer.
const INTEGER_RATE_TOL: f64 = 1e-9;

/// `-p log2 p - (1-p) log2 (1-p)`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_prob("p", p)?;
    Ok(xlog2x(p) + xlog2x(1.0 - p))
}

#[inline]
pub(crate) fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Natural-log PMF of Binomial(k, p) for i = 0..=k.
pub fn binomial_log_pmf(k: u64, p: f64) -> Vec<f64> {
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut ln_choose = 0.0f64;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((k - i + 1) as f64).ln() - (i as f64).ln();
        }
        let a = if i == 0 { 0.0 } else { i as f64 * ln_p };
        let b = if i == k { 0.0 } else { (k - i) as f64 * ln_q };
        out.push(ln_choose + a + b);
    }
    out
}

/// PMF of Binomial(k, p).
pub fn binomial_pmf(k: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut v = vec![0.0; k as usize + 1];
        v[if p >= 1.0 { k as usize } else { 0 }] = 1.0;
        return v;
    }
    binomial_log_pmf(k, p).into_iter().map(f64::exp).collect()
}

/// Shannon entropy of Binomial(k, p) by exact PMF summation in log space.
pub fn binomial_entropy(k: u64, p: f64) -> Result<f64> {
    check_prob("p", p)?;
    if k == 0 {
        return Err(LeakError::Domain {
            name: "k",
            value: 0.0,
            range: "k >= 1",
        });
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    let h: f64 = binomial_log_pmf(k, p)
        .into_iter()
        .map(|lp| {
            let q = lp.exp();
            if q == 0.0 {
                0.0
            } else {
                -q * lp
            }
        })
        .sum();
    Ok(h / std::f64::consts::LN_2)
}

/// `H(delta_1..delta_i | sum delta)` for i.i.d. Bernoulli(lambda): the entropy of the
/// arrangement once the count is known.
pub fn conditional_arrangement_entropy(i: u64, lambda: f64) -> Result<f64> {
    let h = binary_entropy(lambda)?;
    Ok(i as f64 * h - binomial_entropy(i, lambda)?)
}

/// Weight of the short gap `floor(1/eps)` in the two-point mixture with mean `1/eps`.
/// Equals 1 when `1/eps` is an integer (the mixture collapses to one gap).
pub fn alpha(eps: f64) -> Result<f64> {
    check_open_unit("eps", eps)?;
    Ok(GapLaw::from_rate(eps)?.p_short)
}

/// Two-point law of attacker inter-arrival gaps with mean `1/omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapLaw {
    pub short: u64,
    pub long: u64,
    /// Probability of `short`; `long` has the rest.
    pub p_short: f64,
}

impl GapLaw {
    pub fn from_rate(omega: f64) -> Result<GapLaw> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(LeakError::Domain {
                name: "omega",
                value: omega,
                range: "(0, 1]",
            });
        }
        let x = 1.0 / omega;
        let nearest = x.round();
        if (x - nearest).abs() <= INTEGER_RATE_TOL * x {
            let g = nearest as u64;
            return Ok(GapLaw {
                short: g,
                long: g,
                p_short: 1.0,
            });
        }
        let short = x.floor() as u64;
        let long = short + 1;
        Ok(GapLaw {
            short,
            long,
            p_short: long as f64 - x,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.short == self.long
    }

    pub fn mean(&self) -> f64 {
        self.p_short * self.short as f64 + (1.0 - self.p_short) * self.long as f64
    }

    /// `(gap, probability)` pairs with nonzero probability.
    pub fn atoms(&self) -> Vec<(u64, f64)> {
        if self.is_degenerate() {
            vec![(self.short, 1.0)]
        } else {
            vec![(self.short, self.p_short), (self.long, 1.0 - self.p_short)]
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.is_degenerate() || rng.random_bool(self.p_short) {
            self.short
        } else {
            self.long
        }
    }
}

/// Entropy per sample of the counts seen by the optimal periodic sampler of rate `omega`:
/// `alpha H(Bin(floor(1/omega))) + (1 - alpha) H(Bin(ceil(1/omega)))`.
pub fn optimal_sampling_entropy_rate(omega: f64, lambda: f64) -> Result<f64> {
    check_prob("lambda", lambda)?;
    let law = GapLaw::from_rate(omega)?;
    law.atoms()
        .into_iter()
        .map(|(g, w)| binomial_entropy(g, lambda).map(|h| w * h))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let p: f64 = 0.11;
        let direct = -(p * p.log2()) - ((1.0 - p) * (1.0 - p).log2());
        assert_abs_diff_eq!(binary_entropy(p).unwrap(), direct, epsilon = 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn alpha_values() {
        assert_abs_diff_eq!(alpha(0.4).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(alpha(0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(alpha(0.3).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        // 1/0.1 is not exactly 10 in binary floating point
        assert_eq!(alpha(0.1).unwrap(), 1.0);
        assert!(alpha(0.0).is_err());
        assert!(alpha(1.0).is_err());
    }

    #[test]
    fn gap_law_mean_is_inverse_rate() {
        for omega in [0.05, 0.13, 0.3, 0.4, 0.45, 0.6, 0.99, 1.0] {
            let law = GapLaw::from_rate(omega).unwrap();
            assert_abs_diff_eq!(law.mean(), 1.0 / omega, epsilon = 1e-9);
        }
    }

    #[test]
    fn binomial_entropy_small_cases() {
        for p in [0.01, 0.3, 0.5, 0.93] {
            assert_abs_diff_eq!(binomial_entropy(1, p).unwrap(), binary_entropy(p).unwrap(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(binomial_entropy(2, 0.5).unwrap(), 1.5, epsilon = 1e-14);
        assert_eq!(binomial_entropy(5, 0.0).unwrap(), 0.0);
        assert!(binomial_entropy(0, 0.5).is_err());
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        for k in [1, 7, 60, 500] {
            let s: f64 = binomial_pmf(k, 0.37).iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn arrangement_entropy() {
        assert_abs_diff_eq!(conditional_arrangement_entropy(1, 0.3).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(conditional_arrangement_entropy(2, 0.5).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn sampling_rate_endpoints() {
        assert_abs_diff_eq!(
            optimal_sampling_entropy_rate(1.0, 0.2).unwrap(),
            binary_entropy(0.2).unwrap(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(optimal_sampling_entropy_rate(0.5, 0.5).unwrap(), 1.5, epsilon = 1e-14);
    }
}
