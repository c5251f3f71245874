//! Python bindings for `leaklab`.
//!
//! Rates are passed as `lambda_` because `lambda` is a Python keyword. Library errors
//! surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use leaklab::analytic::{self, Scheme};
use leaklab::estimation;
use leaklab::experiments::{self, ExperimentSpec, Mode, Settings, DEFAULT_SEED};
use leaklab::sim::{self, AttackObservation, AttackStrategy, Policy, TieBreak};
use leaklab::LeakError;

fn py_err(e: LeakError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(s: &str) -> PyResult<Scheme> {
    Scheme::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown scheduler {s:?}")))
}

fn parse_policy(s: &str) -> PyResult<Policy> {
    Policy::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown policy {s:?}")))
}

#[pyclass(name = "LeakageResult", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PyLeakageResult {
    scheme: String,
    lambda_: f64,
    omega: Option<f64>,
    kind: String,
    bits_per_slot: f64,
    ratio: f64,
    ci: Option<(f64, f64)>,
}

impl From<analytic::LeakageResult> for PyLeakageResult {
    fn from(r: analytic::LeakageResult) -> Self {
        PyLeakageResult {
            scheme: r.scheme.name().to_string(),
            lambda_: r.lambda,
            omega: r.omega,
            kind: r.kind.name().to_string(),
            bits_per_slot: r.bits_per_slot,
            ratio: r.ratio,
            ci: r.ci,
        }
    }
}

#[pymethods]
impl PyLeakageResult {
    fn __repr__(&self) -> String {
        format!(
            "LeakageResult(scheme={:?}, lambda_={}, kind={:?}, bits_per_slot={:.6}, ratio={:.6})",
            self.scheme, self.lambda_, self.kind, self.bits_per_slot, self.ratio
        )
    }
}

#[pyclass(name = "BusyPeriodDist", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PyBusyPeriodDist {
    lambda_: f64,
    /// Period lengths in slots.
    support: Vec<u64>,
    probs: Vec<f64>,
    truncation_mass: f64,
    mean: f64,
    exact_mean: f64,
    entropy: f64,
    entropy_error: f64,
}

impl From<analytic::BusyPeriodDist> for PyBusyPeriodDist {
    fn from(d: analytic::BusyPeriodDist) -> Self {
        PyBusyPeriodDist {
            lambda_: d.lambda,
            exact_mean: d.exact_mean(),
            support: d.support,
            probs: d.probs,
            truncation_mass: d.truncation_mass,
            mean: d.mean,
            entropy: d.entropy,
            entropy_error: d.entropy_error,
        }
    }
}

#[pymethods]
impl PyBusyPeriodDist {
    fn __len__(&self) -> usize {
        self.probs.len()
    }
}

#[pyclass(name = "DetWcBoundPoint", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PyDetWcBoundPoint {
    lambda_: f64,
    omega_star: f64,
    z0: f64,
    empty_prob: f64,
    bound_bits_per_slot: f64,
    ratio: f64,
    residual: f64,
}

/// One simulation run's configuration.
#[pyclass(name = "SimConfig", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySimConfig {
    inner: sim::SimConfig,
}

#[pymethods]
impl PySimConfig {
    /// `attacker` is `nonstop`, `odd`, `silent`, `periodic` (with `omega`) or `periodic:<omega>`.
    #[new]
    #[pyo3(signature = (policy, attacker, lambda_, horizon, seed = DEFAULT_SEED, tie_break = None, omega = None))]
    fn new(
        policy: &str,
        attacker: &str,
        lambda_: f64,
        horizon: u64,
        seed: u64,
        tie_break: Option<&str>,
        omega: Option<f64>,
    ) -> PyResult<Self> {
        let policy = parse_policy(policy)?;
        let attacker = AttackStrategy::parse(attacker, omega)
            .ok_or_else(|| PyValueError::new_err(format!("unknown attacker {attacker:?}")))?;
        let mut inner = sim::SimConfig::new(policy, attacker, lambda_, horizon, seed);
        if let Some(t) = tie_break {
            inner = inner.with_tie_break(match t.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
                "userfirst" | "user" => TieBreak::UserFirst,
                "attackerfirst" | "attacker" => TieBreak::AttackerFirst,
                other => return Err(PyValueError::new_err(format!("unknown tie break {other:?}"))),
            });
        }
        inner.validate().map_err(py_err)?;
        Ok(PySimConfig { inner })
    }

    #[getter]
    fn policy(&self) -> &'static str {
        self.inner.policy.name()
    }

    #[getter]
    fn attacker(&self) -> String {
        self.inner.attacker.name()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn horizon(&self) -> u64 {
        self.inner.horizon
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!(
            "SimConfig(policy={:?}, attacker={:?}, lambda_={}, horizon={}, seed={})",
            self.policy(),
            self.attacker(),
            self.inner.lambda,
            self.inner.horizon,
            self.inner.seed
        )
    }
}

/// Traces from one run. `served` holds one character per slot: `U`, `A` or `-`.
#[pyclass(name = "SimResult", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PySimResult {
    arrivals: Vec<bool>,
    attacker_arrivals: Vec<u64>,
    departures: Vec<u64>,
    user_queue_len: Vec<u32>,
    served: String,
}

#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    analytic::binary_entropy(p).map_err(py_err)
}

#[pyfunction]
fn binomial_entropy(k: u64, p: f64) -> PyResult<f64> {
    analytic::binomial_entropy(k, p).map_err(py_err)
}

#[pyfunction]
fn alpha(eps: f64) -> PyResult<f64> {
    analytic::alpha(eps).map_err(py_err)
}

#[pyfunction]
fn conditional_arrangement_entropy(i: u64, lambda_: f64) -> PyResult<f64> {
    analytic::conditional_arrangement_entropy(i, lambda_).map_err(py_err)
}

#[pyfunction]
fn optimal_sampling_entropy_rate(omega: f64, lambda_: f64) -> PyResult<f64> {
    analytic::optimal_sampling_entropy_rate(omega, lambda_).map_err(py_err)
}

/// Analytic leakage of `scheme` (`lqf`, `fcfs`, `rr`, `wctdma` or `detwc`).
#[pyfunction]
fn analytic_leakage(scheme: &str, lambda_: f64) -> PyResult<PyLeakageResult> {
    analytic::analytic_leakage(parse_scheme(scheme)?, lambda_)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (lambda_, tail_eps = analytic::DEFAULT_TAIL_EPS, wctdma = false))]
fn busy_period_pmf(lambda_: f64, tail_eps: f64, wctdma: bool) -> PyResult<PyBusyPeriodDist> {
    let d = analytic::busy_period_pmf(lambda_, tail_eps).map_err(py_err)?;
    Ok(if wctdma { d.rescaled(analytic::BusyScale::WcTdma) } else { d }.into())
}

/// `(z0, empty_prob, residual)` for periodic sampling at rate `omega`.
#[pyfunction]
fn detwc_root(lambda_: f64, omega: f64) -> PyResult<(f64, f64, f64)> {
    let r = analytic::detwc_root(lambda_, omega).map_err(py_err)?;
    Ok((r.z0, r.empty_prob, r.residual))
}

#[pyfunction]
fn leakage_detwc_lower(lambda_: f64) -> PyResult<PyDetWcBoundPoint> {
    let p = analytic::leakage_detwc_lower(lambda_).map_err(py_err)?;
    Ok(PyDetWcBoundPoint {
        lambda_: p.lambda,
        omega_star: p.omega_star,
        z0: p.z0,
        empty_prob: p.empty_prob,
        bound_bits_per_slot: p.bound_bits_per_slot,
        ratio: p.ratio,
        residual: p.residual,
    })
}

#[pyfunction]
fn simulate(py: Python<'_>, config: PySimConfig) -> PyResult<PySimResult> {
    let out = py.detach(|| sim::run_simulation(&config.inner)).map_err(py_err)?;
    Ok(PySimResult {
        arrivals: out.arrivals.slots().to_vec(),
        attacker_arrivals: out.observation.arrivals().to_vec(),
        departures: out.observation.departures().to_vec(),
        user_queue_len: out.queues.user_queue_len().to_vec(),
        served: out.queues.served().iter().map(|s| s.code()).collect(),
    })
}

fn observation(arrivals: Vec<u64>, departures: Vec<u64>) -> PyResult<AttackObservation> {
    let obs = AttackObservation::new(arrivals, departures);
    obs.validate().map_err(py_err)?;
    Ok(obs)
}

/// Decoded arrival indicators for slots `1..=n` from a nonstop probe of LQF.
#[pyfunction]
fn decode_lqf(attacker_arrivals: Vec<u64>, departures: Vec<u64>, n: u64) -> PyResult<Vec<bool>> {
    let obs = observation(attacker_arrivals, departures)?;
    Ok(estimation::decode_lqf(&obs, n).map_err(py_err)?.slots().to_vec())
}

/// `(counts, exact_mask)` per sampling window of an FCFS observation.
#[pyfunction]
fn decode_fcfs_counts(attacker_arrivals: Vec<u64>, departures: Vec<u64>) -> PyResult<(Vec<u64>, Vec<bool>)> {
    let obs = observation(attacker_arrivals, departures)?;
    let c = estimation::decode_fcfs_counts(&obs).map_err(py_err)?;
    Ok((c.counts, c.exact_mask))
}

#[pyfunction]
fn extract_busy_periods(attacker_arrivals: Vec<u64>, departures: Vec<u64>, policy: &str) -> PyResult<Vec<u64>> {
    let obs = observation(attacker_arrivals, departures)?;
    Ok(estimation::extract_busy_periods(&obs, parse_policy(policy)?)
        .map_err(py_err)?
        .periods)
}

/// `(bits, ci_low, ci_high)`: Miller-Madow entropy with a bootstrap interval.
#[pyfunction]
#[pyo3(signature = (samples, seed = 0))]
fn empirical_entropy_rate(samples: Vec<u64>, seed: u64) -> PyResult<(f64, f64, f64)> {
    let e = estimation::empirical_entropy_rate(&samples, seed).map_err(py_err)?;
    Ok((e.bits, e.ci_low, e.ci_high))
}

#[pyfunction]
#[pyo3(signature = (config, trials = 1))]
fn empirical_leakage(py: Python<'_>, config: PySimConfig, trials: u64) -> PyResult<PyLeakageResult> {
    py.detach(|| estimation::empirical_leakage(&config.inner, trials))
        .map(|e| e.result.into())
        .map_err(py_err)
}

fn spec(mode: Mode, lambda_grid: Option<String>, scheduler: Option<String>, seed: Option<u64>) -> PyResult<ExperimentSpec> {
    let cli = Settings {
        lambda_grid,
        scheduler,
        seed: seed.map(|s| s.to_string()),
        ..Settings::default()
    };
    ExperimentSpec::resolve(mode, cli, Settings::default()).map_err(py_err)
}

/// The figure CSV as text. `lambda_grid` uses the command-line syntax.
#[pyfunction]
#[pyo3(signature = (lambda_grid = None, scheduler = None))]
fn figure2_csv(py: Python<'_>, lambda_grid: Option<String>, scheduler: Option<String>) -> PyResult<String> {
    let spec = spec(Mode::Figure2, lambda_grid, scheduler, None)?;
    py.detach(|| experiments::run_figure2(&spec)).map_err(py_err)
}

/// Runs the verification suite and returns `(all_passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (seed = None))]
fn verify(py: Python<'_>, seed: Option<u64>) -> PyResult<(bool, String)> {
    let spec = spec(Mode::Verify, None, None, seed)?;
    let report = py.detach(|| experiments::run_verify(&spec, None)).map_err(py_err)?;
    Ok((report.passed(), report.to_text()))
}

#[pymodule]
mod leaklab_py {
    #[pymodule_export]
    use super::{
        alpha, analytic_leakage, binary_entropy, binomial_entropy, busy_period_pmf, conditional_arrangement_entropy,
        decode_fcfs_counts, decode_lqf, detwc_root, empirical_entropy_rate, empirical_leakage, extract_busy_periods,
        figure2_csv, leakage_detwc_lower, optimal_sampling_entropy_rate, simulate, verify, PyBusyPeriodDist,
        PyDetWcBoundPoint, PyLeakageResult, PySimConfig, PySimResult,
    };
}
