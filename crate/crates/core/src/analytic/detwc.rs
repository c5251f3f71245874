//! Universal lower bound for deterministic work-conserving schedulers.
//!
//! A periodic sampler with rate `omega` observes a backlog that obeys
//! `q_k = (q_{k-1} + 1 + X_k - T_k)+`, where `T_k` is the gap law and `X_k` counts user
//! arrivals in the gap. The increment `1 + X_k - T_k` never exceeds one, so the
//! stationary backlog is geometric: `P(q >= j) = sigma^j` with `sigma` the unique root
//! in `(0, 1)` of `sigma = E[(lambda + (1-lambda) sigma)^T]`. In generating-function
//! form `z0 = 1/sigma` is the root outside the unit circle of
//!
//! `alpha z^{1+c-f} (1-lambda+lambda z)^f + (1-alpha) z (1-lambda+lambda z)^c - z^c = 0`
//!
//! with `f = floor(1/omega)`, `c = ceil(1/omega)` and `alpha` the weight of `f`.
//! The empty probability at sampling instants is `1 - sigma = (z0 - 1)/z0`.
//!
//! A second form of the equation pairs `alpha` with the `c` exponent instead. That
//! pairing describes a sampler whose short and long gap weights are swapped (so its
//! real rate is not `omega`); it is available through [`RootForm::SwappedWeights`]
//! for comparison only.

use serde::Serialize;

use super::entropy::{binary_entropy, GapLaw};
use super::root::{bisect_newton, golden_section_max};
use crate::error::{check_open_unit, LeakError, Result};

const GRID_POINTS: usize = 512;
const EDGE: f64 = 1e-3;

/// Which weighting of the two gap terms to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootForm {
    /// `alpha` on the `floor(1/omega)` gap: the sampler actually running at rate `omega`.
    Consistent,
    /// `alpha` on the `ceil(1/omega)` gap.
    SwappedWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetWcRoot {
    pub z0: f64,
    /// `1/z0`: the geometric ratio of the stationary backlog.
    pub sigma: f64,
    pub empty_prob: f64,
    /// Root equation divided by `z^c`, evaluated at `z0`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetWcBoundPoint {
    pub lambda: f64,
    pub omega_star: f64,
    pub z0: f64,
    pub empty_prob: f64,
    pub bound_bits_per_slot: f64,
    pub ratio: f64,
    pub residual: f64,
}

fn atoms(omega: f64, form: RootForm) -> Result<Vec<(u64, f64)>> {
    let law = GapLaw::from_rate(omega)?;
    Ok(match form {
        RootForm::Consistent => law.atoms(),
        RootForm::SwappedWeights if !law.is_degenerate() => {
            vec![(law.short, 1.0 - law.p_short), (law.long, law.p_short)]
        }
        RootForm::SwappedWeights => law.atoms(),
    })
}

fn check_args(lambda: f64, omega: f64) -> Result<()> {
    check_open_unit("lambda", lambda)?;
    if !(omega > 0.0 && omega < 1.0 - lambda) {
        return Err(LeakError::Domain {
            name: "omega",
            value: omega,
            range: "(0, 1 - lambda)",
        });
    }
    Ok(())
}

/// Root equation divided by `z^c`, i.e. `E[z ((1-lambda)/z + lambda)^T] - 1`.
/// Written this way it stays finite for the very large roots that occur at small `lambda`.
pub fn root_equation(lambda: f64, omega: f64, z: f64, form: RootForm) -> Result<f64> {
    let w = (1.0 - lambda) / z + lambda;
    Ok(atoms(omega, form)?
        .into_iter()
        .map(|(t, p)| p * z * w.powi(t as i32))
        .sum::<f64>()
        - 1.0)
}

/// The consistent root outside the unit circle.
pub fn detwc_root(lambda: f64, omega: f64) -> Result<DetWcRoot> {
    detwc_root_form(lambda, omega, RootForm::Consistent)
}

/// Root of either form. Solved in `sigma = 1/z`, where the bracket is `(0, 1)`.
pub fn detwc_root_form(lambda: f64, omega: f64, form: RootForm) -> Result<DetWcRoot> {
    check_args(lambda, omega)?;
    let atoms = atoms(omega, form)?;
    let k = |s: f64| {
        let u = lambda + (1.0 - lambda) * s;
        atoms.iter().map(|&(t, p)| p * u.powi(t as i32)).sum::<f64>() - s
    };
    let dk = |s: f64| {
        let u = lambda + (1.0 - lambda) * s;
        atoms
            .iter()
            .map(|&(t, p)| p * t as f64 * (1.0 - lambda) * u.powi(t as i32 - 1))
            .sum::<f64>()
            - 1.0
    };
    // k(0) > 0 and k(1) = 0; below 1 it is negative exactly when the sampler is stable.
    let hi = (1..=52)
        .map(|j| 1.0 - 2f64.powi(-j))
        .find(|&s| k(s) < 0.0)
        .ok_or_else(|| {
            LeakError::NoRoot(format!(
                "no sign change of the root equation below z = 1 for lambda = {lambda}, omega = {omega}"
            ))
        })?;
    let sigma = bisect_newton(k, dk, 0.0, hi, 1e-15)?;
    let z0 = 1.0 / sigma;
    Ok(DetWcRoot {
        z0,
        sigma,
        empty_prob: 1.0 - sigma,
        residual: root_equation(lambda, omega, z0, form)?,
    })
}

/// `omega (z0 - 1)/(2 z0) H(lambda)`: the det-WC objective at one sampling rate.
pub fn detwc_objective(lambda: f64, omega: f64) -> Result<f64> {
    let root = detwc_root(lambda, omega)?;
    Ok(omega * root.empty_prob / 2.0 * binary_entropy(lambda)?)
}

/// Maximizes the objective over `omega in (0, 1 - lambda)`.
///
/// Candidates are a uniform grid plus every breakpoint `1/n` inside it. The best
/// candidate is then refined by golden-section search on each side up to its
/// neighbouring candidates, which keeps every search inside one smooth piece.
pub fn leakage_detwc_lower(lambda: f64) -> Result<DetWcBoundPoint> {
    maximize(lambda, RootForm::Consistent)
}

/// Same maximization with the swapped-weights equation.
pub fn leakage_detwc_lower_form(lambda: f64, form: RootForm) -> Result<DetWcBoundPoint> {
    maximize(lambda, form)
}

fn maximize(lambda: f64, form: RootForm) -> Result<DetWcBoundPoint> {
    check_open_unit("lambda", lambda)?;
    let h = binary_entropy(lambda)?;
    let edge = EDGE.min((1.0 - lambda) / 4.0);
    let lo = edge;
    let hi = 1.0 - lambda - edge;

    let mut grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let n_first = (1.0 / hi).ceil() as u64;
    let n_last = (1.0 / lo).floor() as u64;
    grid.extend((n_first..=n_last).map(|n| 1.0 / n as f64).filter(|&w| w > lo && w < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let objective = |w: f64| -> f64 {
        match detwc_root_form(lambda, w, form) {
            Ok(r) => w * r.empty_prob / 2.0 * h,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let values: Vec<f64> = grid.iter().map(|&w| objective(w)).collect();
    let (best_i, _) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if !values[best_i].is_finite() {
        return Err(LeakError::NoRoot(format!("root equation has no root on the omega grid at lambda = {lambda}")));
    }

    let mut best = (grid[best_i], values[best_i]);
    if best_i > 0 {
        let cand = golden_section_max(objective, grid[best_i - 1], grid[best_i], 1e-12);
        if cand.1 > best.1 {
            best = cand;
        }
    }
    if best_i + 1 < grid.len() {
        let cand = golden_section_max(objective, grid[best_i], grid[best_i + 1], 1e-12);
        if cand.1 > best.1 {
            best = cand;
        }
    }

    let root = detwc_root_form(lambda, best.0, form)?;
    let bound = best.0 * root.empty_prob / 2.0 * h;
    Ok(DetWcBoundPoint {
        lambda,
        omega_star: best.0,
        z0: root.z0,
        empty_prob: root.empty_prob,
        bound_bits_per_slot: bound,
        ratio: if h > 0.0 { bound / h } else { 0.0 },
        residual: root.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_solved_point() {
        // omega = 0.6: gaps 1 (w.p. 1/3) and 2 (w.p. 2/3). With lambda = 0.2 the fixed
        // point sigma = (1/3) u + (2/3) u^2, u = 0.2 + 0.8 sigma, is sigma = 7/32.
        let r = detwc_root(0.2, 0.6).unwrap();
        assert_abs_diff_eq!(r.sigma, 7.0 / 32.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.empty_prob, 25.0 / 32.0, epsilon = 1e-13);
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn swapped_form_at_same_point() {
        let r = detwc_root_form(0.2, 0.6, RootForm::SwappedWeights).unwrap();
        assert_abs_diff_eq!(r.empty_prob, 0.3125, epsilon = 1e-12);
    }

    #[test]
    fn empty_prob_matches_z0() {
        for (l, w) in [(0.05, 0.3), (0.3, 0.25), (0.45, 0.5), (1e-4, 0.7)] {
            let r = detwc_root(l, w).unwrap();
            assert!(r.z0 > 1.0);
            assert_abs_diff_eq!(r.empty_prob, (r.z0 - 1.0) / r.z0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_unstable_sampler() {
        assert!(detwc_root(0.3, 0.7).is_err());
        assert!(detwc_root(0.0, 0.3).is_err());
    }

    #[test]
    fn bound_is_below_entropy() {
        for l in [0.05, 0.3, 0.7, 0.95] {
            let p = leakage_detwc_lower(l).unwrap();
            assert!(p.ratio > 0.0 && p.ratio <= 0.5, "{p:?}");
            assert!(p.omega_star > 0.0 && p.omega_star < 1.0 - l);
        }
    }
}
