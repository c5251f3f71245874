//! Discrete-time model of a user and an attacker sharing a deterministic scheduler,
//! with closed-form leakage rates, simulation, decoders and estimators.
//!
//! * [`sim`] runs the slotted queue and records what the attacker sees.
//! * [`analytic`] evaluates the leakage formulas and bounds in bits per slot.
//! * [`estimation`] decodes attacker observations and estimates leakage empirically.
//! * [`experiments`] sweeps parameters, writes CSV and runs the verification suite.

pub mod analytic;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod sim;

pub use analytic::{LeakageKind, LeakageResult, Scheme};
pub use error::{LeakError, Result};
pub use sim::{run_simulation, AttackObservation, AttackStrategy, ArrivalTrace, Policy, QueueTrace, SimConfig, TieBreak};
