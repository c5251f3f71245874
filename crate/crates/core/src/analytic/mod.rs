//! Closed-form leakage rates and the quantities they are built from. All entropies are
//! in bits.

mod busy_period;
mod detwc;
mod entropy;
mod leakage;
pub mod root;

pub use busy_period::{
    busy_period_pmf, busy_period_prob_catalan, busy_period_prob_printed, closed_form_discrepancies, mean_steps,
    BusyPeriodDist, BusyScale, ClosedFormDiscrepancy, DEFAULT_TAIL_EPS, MAX_STEPS,
};
pub use detwc::{
    detwc_objective, detwc_root, detwc_root_form, leakage_detwc_lower, leakage_detwc_lower_form, root_equation,
    DetWcBoundPoint, DetWcRoot, RootForm,
};
pub use entropy::{
    alpha, binary_entropy, binomial_entropy, binomial_log_pmf, binomial_pmf, conditional_arrangement_entropy,
    optimal_sampling_entropy_rate, GapLaw,
};
pub use leakage::{
    analytic_leakage, leakage_detwc_result, leakage_fcfs, leakage_lqf, leakage_rr_lower, leakage_wctdma_lower,
    rr_lower_from, LeakageKind, LeakageResult, Scheme,
};
