//! Parameter sweeps, CSV output and the verification suite.

mod csv;
mod spec;
mod verify;

pub use csv::{render_csv, CsvRow, RunInfo, CSV_HEADER};
pub use spec::{
    default_bound_grid, default_exact_grid, linear_grid, parse_lambda_grid, validate_grid, ExperimentSpec, Mode, Settings,
    DEFAULT_SEED,
};
pub use verify::{run_verify, CheckResult, Mutation, VerifyReport};

use rayon::prelude::*;

use crate::analytic::{analytic_leakage, Scheme};
use crate::error::{LeakError, Result};
use crate::estimation::empirical_leakage;
use crate::sim::{AttackStrategy, Policy, SimConfig};

fn analytic_rows(spec: &ExperimentSpec) -> Result<Vec<CsvRow>> {
    let points: Vec<(Scheme, f64)> = spec
        .schemes
        .iter()
        .flat_map(|&s| spec.grid_for(s).into_iter().map(move |l| (s, l)))
        .collect();
    points
        .par_iter()
        .map(|&(s, l)| analytic_leakage(s, l).map(CsvRow::analytic))
        .collect()
}

/// Analytic curves for every scheme on its grid (all five schemes for the figure).
pub fn run_figure2(spec: &ExperimentSpec) -> Result<String> {
    let rows = analytic_rows(spec)?;
    Ok(render_csv(spec.echo(), rows, &[]))
}

/// Analytic values for the selected schemes.
pub fn run_analytic(spec: &ExperimentSpec) -> Result<String> {
    run_figure2(spec)
}

/// The attack used for a scheme's empirical estimate unless overridden.
pub fn default_attack(scheme: Scheme, lambda: f64, omega: Option<f64>) -> Result<(Policy, AttackStrategy)> {
    match scheme {
        Scheme::Lqf => Ok((Policy::Lqf, AttackStrategy::NonstopMonitor)),
        Scheme::RoundRobin => Ok((Policy::RoundRobin, AttackStrategy::NonstopMonitor)),
        Scheme::WcTdma => Ok((Policy::WcTdma, AttackStrategy::OddSlots)),
        Scheme::Fcfs => Ok((
            Policy::Fcfs,
            AttackStrategy::PeriodicSampling {
                omega: omega.unwrap_or(1.0 - lambda - 0.01),
            },
        )),
        Scheme::DetWc => Err(LeakError::Unsupported("det-WC is a class bound and has no simulator".into())),
    }
}

/// Empirical estimates with confidence intervals, each next to its analytic value.
pub fn run_empirical(spec: &ExperimentSpec) -> Result<String> {
    let mut points = Vec::new();
    for &s in &spec.schemes {
        for l in spec.grid_for(s) {
            let (policy, default_attacker) = default_attack(s, l, spec.omega)?;
            let attacker = spec.attacker.unwrap_or(default_attacker);
            points.push((s, SimConfig::new(policy, attacker, l, spec.horizon, spec.seed)));
        }
    }
    let results: Vec<(Scheme, f64, Result<_>, Result<_>)> = points
        .par_iter()
        .map(|(s, cfg)| (*s, cfg.lambda, empirical_leakage(cfg, spec.trials), analytic_leakage(*s, cfg.lambda)))
        .collect();

    let run = RunInfo {
        horizon: spec.horizon,
        trials: spec.trials,
        seed: spec.seed,
    };
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (s, l, emp, ana) in results {
        let emp = emp?;
        if let Some(f) = emp.exact_fraction {
            notes.push(format!("{} lambda={l} exact_window_fraction={f:.6}", s.name()));
        }
        if emp.undersampled {
            notes.push(format!("{} lambda={l} undersampled", s.name()));
        }
        rows.push(CsvRow {
            result: emp.result,
            run: Some(run),
        });
        rows.push(CsvRow::analytic(ana?));
    }
    Ok(render_csv(spec.echo(), rows, &notes))
}
