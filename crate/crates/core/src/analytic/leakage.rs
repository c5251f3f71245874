use serde::{Deserialize, Serialize};

use super::busy_period::{busy_period_pmf, BusyPeriodDist, DEFAULT_TAIL_EPS};
use super::detwc::leakage_detwc_lower;
use super::entropy::{binary_entropy, optimal_sampling_entropy_rate};
use crate::error::{check_open_unit, LeakError, Result};
use crate::sim::Policy;

/// A leakage curve: one scheduler, or the det-WC class as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    DetWc,
    Fcfs,
    Lqf,
    RoundRobin,
    WcTdma,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::DetWc, Scheme::Fcfs, Scheme::Lqf, Scheme::RoundRobin, Scheme::WcTdma];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DetWc => "detwc",
            Scheme::Fcfs => "fcfs",
            Scheme::Lqf => "lqf",
            Scheme::RoundRobin => "rr",
            Scheme::WcTdma => "wctdma",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        if key == "detwc" {
            return Some(Scheme::DetWc);
        }
        Policy::parse(&key).and_then(Scheme::from_policy)
    }

    pub fn from_policy(p: Policy) -> Option<Scheme> {
        match p {
            Policy::Fcfs => Some(Scheme::Fcfs),
            Policy::Lqf => Some(Scheme::Lqf),
            Policy::RoundRobin => Some(Scheme::RoundRobin),
            Policy::WcTdma => Some(Scheme::WcTdma),
            Policy::Tdma => None,
        }
    }

    pub fn policy(self) -> Option<Policy> {
        match self {
            Scheme::DetWc => None,
            Scheme::Fcfs => Some(Policy::Fcfs),
            Scheme::Lqf => Some(Policy::Lqf),
            Scheme::RoundRobin => Some(Policy::RoundRobin),
            Scheme::WcTdma => Some(Policy::WcTdma),
        }
    }

    /// Curves that are lower bounds. Experiments keep them to `lambda < 0.5`, although
    /// the det-WC bound itself is defined on all of `(0, 1)`.
    pub fn is_bound(self) -> bool {
        matches!(self, Scheme::DetWc | Scheme::RoundRobin | Scheme::WcTdma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeakageKind {
    Exact,
    LowerBound,
    Empirical,
}

impl LeakageKind {
    pub fn name(self) -> &'static str {
        match self {
            LeakageKind::Exact => "exact",
            LeakageKind::LowerBound => "lower_bound",
            LeakageKind::Empirical => "empirical",
        }
    }
}

/// Leakage in bits per slot for one (scheme, lambda) point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageResult {
    pub scheme: Scheme,
    pub lambda: f64,
    /// Attacker sampling rate, where one is involved.
    pub omega: Option<f64>,
    pub kind: LeakageKind,
    pub bits_per_slot: f64,
    /// `bits_per_slot / H(lambda)`; zero when `H(lambda) = 0`.
    pub ratio: f64,
    /// Confidence interval on `bits_per_slot` for empirical results.
    pub ci: Option<(f64, f64)>,
}

impl LeakageResult {
    pub fn new(scheme: Scheme, lambda: f64, kind: LeakageKind, bits_per_slot: f64) -> Result<Self> {
        let h = binary_entropy(lambda)?;
        Ok(LeakageResult {
            scheme,
            lambda,
            omega: None,
            kind,
            bits_per_slot,
            ratio: if h > 0.0 { bits_per_slot / h } else { 0.0 },
            ci: None,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> Self {
        self.ci = Some((lo, hi));
        self
    }

    /// CI mapped to the ratio scale.
    pub fn ratio_ci(&self) -> Option<(f64, f64)> {
        let h = binary_entropy(self.lambda).ok()?;
        if h > 0.0 {
            self.ci.map(|(a, b)| (a / h, b / h))
        } else {
            None
        }
    }
}

pub fn leakage_lqf(lambda: f64) -> Result<LeakageResult> {
    check_open_unit("lambda", lambda)?;
    LeakageResult::new(Scheme::Lqf, lambda, LeakageKind::Exact, binary_entropy(lambda)?)
}

/// Sampling at rate `1 - lambda` (the largest stable rate), scaled to bits per slot.
pub fn leakage_fcfs(lambda: f64) -> Result<LeakageResult> {
    check_open_unit("lambda", lambda)?;
    let omega = 1.0 - lambda;
    let bits = omega * optimal_sampling_entropy_rate(omega, lambda)?;
    Ok(LeakageResult::new(Scheme::Fcfs, lambda, LeakageKind::Exact, bits)?.with_omega(omega))
}

fn check_half(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 0.5 {
        Ok(())
    } else {
        Err(LeakError::Domain {
            name: "lambda",
            value: lambda,
            range: "(0, 0.5)",
        })
    }
}

/// `(1 - 2 lambda) H(B)`.
pub fn leakage_rr_lower(lambda: f64) -> Result<LeakageResult> {
    check_half(lambda)?;
    let dist = busy_period_pmf(lambda, DEFAULT_TAIL_EPS)?;
    rr_lower_from(lambda, &dist, false)
}

/// Round-robin bound from an already computed distribution. `mutate` replaces the
/// `1 - 2 lambda` prefactor by `1 - lambda`; it exists only so the verification suite
/// can prove it notices a wrong prefactor.
#[doc(hidden)]
pub fn rr_lower_from(lambda: f64, dist: &BusyPeriodDist, mutate: bool) -> Result<LeakageResult> {
    check_half(lambda)?;
    let prefactor = if mutate { 1.0 - lambda } else { 1.0 - 2.0 * lambda };
    LeakageResult::new(Scheme::RoundRobin, lambda, LeakageKind::LowerBound, prefactor * dist.entropy)
}

/// `(1 - 2 lambda)/(2 - 2 lambda) H(B)`.
pub fn leakage_wctdma_lower(lambda: f64) -> Result<LeakageResult> {
    check_half(lambda)?;
    let dist = busy_period_pmf(lambda, DEFAULT_TAIL_EPS)?;
    let bits = (1.0 - 2.0 * lambda) / (2.0 - 2.0 * lambda) * dist.entropy;
    LeakageResult::new(Scheme::WcTdma, lambda, LeakageKind::LowerBound, bits)
}

/// The det-WC bound as a [`LeakageResult`], with the maximizing rate as `omega`.
pub fn leakage_detwc_result(lambda: f64) -> Result<LeakageResult> {
    let p = leakage_detwc_lower(lambda)?;
    Ok(LeakageResult::new(Scheme::DetWc, lambda, LeakageKind::LowerBound, p.bound_bits_per_slot)?.with_omega(p.omega_star))
}

/// Analytic value for any scheme.
pub fn analytic_leakage(scheme: Scheme, lambda: f64) -> Result<LeakageResult> {
    match scheme {
        Scheme::Lqf => leakage_lqf(lambda),
        Scheme::Fcfs => leakage_fcfs(lambda),
        Scheme::RoundRobin => leakage_rr_lower(lambda),
        Scheme::WcTdma => leakage_wctdma_lower(lambda),
        Scheme::DetWc => leakage_detwc_result(lambda),
    }
}
