//! Slot-by-slot simulation of a user and an attacker sharing one server.
//!
//! Time is slotted and 1-indexed. At the beginning of slot `t` both sources may
//! enqueue one job, the scheduler then serves at most one job during `t`, and the
//! served job departs at `t + 1`. A job that is served immediately therefore has
//! delay exactly one slot.

mod attacker;
mod scheduler;
mod trace;

pub use attacker::{attacker_next_arrival, AttackStrategy, AttackerState};
pub use scheduler::{scheduler_step, Policy, QueueView, Served, Source, TieBreak};
pub use trace::{write_trace_dump, ArrivalTrace, AttackObservation, QueueTrace};

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LeakError, Result};

/// RNG stream carrying the user's Bernoulli arrivals.
pub const USER_STREAM: u64 = 0;
/// RNG stream carrying the attacker's gap draws.
pub const ATTACKER_STREAM: u64 = 1;

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub policy: Policy,
    pub tie_break: TieBreak,
    pub attacker: AttackStrategy,
    pub lambda: f64,
    pub horizon: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Builds a config with the default tie-break for `policy`: attacker first
    /// for FCFS (same-slot enqueue order), user first everywhere else.
    pub fn new(policy: Policy, attacker: AttackStrategy, lambda: f64, horizon: u64, seed: u64) -> Self {
        SimConfig {
            policy,
            tie_break: TieBreak::default_for(policy),
            attacker,
            lambda,
            horizon,
            seed,
        }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda < 1.0) {
            return Err(LeakError::Domain {
                name: "lambda",
                value: self.lambda,
                range: "[0, 1)",
            });
        }
        if self.horizon == 0 {
            return Err(LeakError::Config("horizon must be at least one slot".into()));
        }
        match self.attacker {
            AttackStrategy::PeriodicSampling { omega } => {
                if !(omega > 0.0 && omega + self.lambda < 1.0) {
                    return Err(LeakError::Config(format!(
                        "periodic sampling needs 0 < omega < 1 - lambda, got omega = {omega}, lambda = {}",
                        self.lambda
                    )));
                }
            }
            AttackStrategy::NonstopMonitor if self.policy == Policy::RoundRobin => {
                if self.lambda > 0.5 {
                    return Err(LeakError::Config(format!(
                        "nonstop monitoring against round robin needs lambda <= 0.5, got {}",
                        self.lambda
                    )));
                }
            }
            AttackStrategy::OddSlots => {
                if self.lambda > 0.5 {
                    return Err(LeakError::Config(format!(
                        "odd-slot probing needs lambda <= 0.5, got {}",
                        self.lambda
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Everything a run produces: the secret, the attacker's view, and the queue state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub arrivals: ArrivalTrace,
    pub observation: AttackObservation,
    pub queues: QueueTrace,
}

/// Draws the user's arrival indicators for `horizon` slots from the user stream of `seed`.
pub fn draw_user_arrivals(lambda: f64, horizon: u64, seed: u64) -> Vec<bool> {
    let mut rng = stream_rng(seed, USER_STREAM);
    (0..horizon).map(|_| rng.random_bool(lambda)).collect()
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a well-separated seed for trial `trial` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one simulation. Deterministic in `config`.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let delta = draw_user_arrivals(config.lambda, config.horizon, config.seed);
    simulate_with_arrivals(config, delta)
}

/// Runs the scheduler against a caller-supplied arrival sequence. `config.lambda` is
/// recorded but not used for drawing; the attacker stream still comes from `config.seed`.
pub fn simulate_with_arrivals(config: &SimConfig, delta: Vec<bool>) -> Result<SimOutput> {
    config.validate()?;
    if delta.len() as u64 != config.horizon {
        return Err(LeakError::Config(format!(
            "arrival sequence has {} slots, horizon is {}",
            delta.len(),
            config.horizon
        )));
    }
    let n = config.horizon as usize;
    let mut attacker_rng = stream_rng(config.seed, ATTACKER_STREAM);
    let mut attacker = AttackerState::new(config.attacker);

    let mut user_len: u32 = 0;
    let mut waiting_attacker: VecDeque<u64> = VecDeque::new();
    // Arrival order across sources only matters for FCFS.
    let track_fifo = config.policy == Policy::Fcfs;
    let mut fifo: VecDeque<Source> = VecDeque::new();
    let mut last_served = match config.tie_break {
        TieBreak::UserFirst => Source::Attacker,
        TieBreak::AttackerFirst => Source::User,
    };

    let mut arrivals_a = Vec::new();
    let mut departures = Vec::new();
    let mut queues = QueueTrace::with_capacity(n);

    for t in 1..=config.horizon {
        let attacker_arrives = attacker.arrives(t, &mut attacker_rng);
        let user_arrives = delta[(t - 1) as usize];

        if attacker_arrives {
            waiting_attacker.push_back(t);
            arrivals_a.push(t);
        }
        if user_arrives {
            user_len += 1;
        }
        if track_fifo {
            let order = match config.tie_break {
                TieBreak::AttackerFirst => [(attacker_arrives, Source::Attacker), (user_arrives, Source::User)],
                TieBreak::UserFirst => [(user_arrives, Source::User), (attacker_arrives, Source::Attacker)],
            };
            fifo.extend(order.iter().filter(|(arrived, _)| *arrived).map(|(_, s)| *s));
        }

        let view = QueueView {
            user_len,
            attacker_len: waiting_attacker.len() as u32,
            fifo_head: fifo.front().copied(),
            last_served,
        };
        let served = scheduler_step(config.policy, config.tie_break, &view, t);
        queues.push(user_len, view.attacker_len, attacker_arrives, served);

        match served {
            Served::User => {
                user_len -= 1;
                if track_fifo {
                    fifo.pop_front();
                }
                last_served = Source::User;
            }
            Served::Attacker => {
                waiting_attacker.pop_front();
                if track_fifo {
                    fifo.pop_front();
                }
                departures.push(t + 1);
                attacker.on_departure(t + 1);
                last_served = Source::Attacker;
            }
            Served::Idle => {}
        }
    }

    // Jobs still queued after slot n have no departure inside the window.
    arrivals_a.truncate(departures.len());

    Ok(SimOutput {
        arrivals: ArrivalTrace::new(delta, config.lambda),
        observation: AttackObservation::new(arrivals_a, departures),
        queues,
    })
}
