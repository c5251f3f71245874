//! Decoders for the attacker's observations, entropy estimators, and the exhaustive
//! oracles used to check the analytic results.

mod decode;
mod empirical;
mod entropy_est;
mod oracles;

pub use decode::{decode_fcfs_counts, decode_lqf, extract_busy_periods, BusyPeriodSample, SampledCounts};
pub use empirical::{empirical_leakage, lqf_interior_start, EmpiricalLeakage};
pub use entropy_est::{
    empirical_entropy_rate, total_variation, wilson_interval, CountTable, EntropyEstimate, BOOTSTRAP_RESAMPLES,
    MIN_SAMPLES,
};
pub use oracles::{
    brute_force_sampling_entropy, interpolation_convexity_check, midpoint_convexity_check,
    pattern_entropy_closed_form, ConvexityReport, InterpolationConvexityReport, SamplingOracleReport,
    MAX_BRUTE_FORCE_HORIZON,
};
