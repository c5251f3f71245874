use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::GapLaw;

/// How the attacker times his probe jobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackStrategy {
    /// Keep exactly one job in the system: arrive at slot 1 and at every own departure.
    NonstopMonitor,
    /// I.i.d. inter-arrival gaps of `floor(1/omega)` or `ceil(1/omega)` with mean `1/omega`.
    PeriodicSampling { omega: f64 },
    /// One job in every odd slot.
    OddSlots,
    Silent,
}

impl AttackStrategy {
    pub fn name(&self) -> String {
        match self {
            AttackStrategy::NonstopMonitor => "nonstop".into(),
            AttackStrategy::PeriodicSampling { omega } => format!("periodic:{omega}"),
            AttackStrategy::OddSlots => "odd".into(),
            AttackStrategy::Silent => "silent".into(),
        }
    }

    /// Parses `nonstop`, `odd`, `silent`, `periodic` (needs `omega`) or `periodic:<omega>`.
    pub fn parse(s: &str, omega: Option<f64>) -> Option<AttackStrategy> {
        let s = s.trim().to_ascii_lowercase();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h.to_string(), Some(t.to_string())),
            None => (s.clone(), None),
        };
        match head.as_str() {
            "nonstop" | "nonstopmonitor" => Some(AttackStrategy::NonstopMonitor),
            "odd" | "oddslots" => Some(AttackStrategy::OddSlots),
            "silent" | "none" => Some(AttackStrategy::Silent),
            "periodic" | "periodicsampling" => {
                let omega = match tail {
                    Some(t) => t.parse().ok()?,
                    None => omega?,
                };
                Some(AttackStrategy::PeriodicSampling { omega })
            }
            _ => None,
        }
    }
}

/// Mutable per-run attacker bookkeeping: the next scheduled arrival slot.
#[derive(Debug, Clone)]
pub struct AttackerState {
    strategy: AttackStrategy,
    gap_law: Option<GapLaw>,
    next: Option<u64>,
}

impl AttackerState {
    pub fn new(strategy: AttackStrategy) -> Self {
        let (gap_law, next) = match strategy {
            AttackStrategy::PeriodicSampling { omega } => (GapLaw::from_rate(omega).ok(), Some(1)),
            AttackStrategy::NonstopMonitor | AttackStrategy::OddSlots => (None, Some(1)),
            AttackStrategy::Silent => (None, None),
        };
        AttackerState { strategy, gap_law, next }
    }

    pub fn strategy(&self) -> AttackStrategy {
        self.strategy
    }

    /// Whether a job arrives in `slot`; slots must be visited in increasing order.
    pub fn arrives<R: Rng + ?Sized>(&mut self, slot: u64, rng: &mut R) -> bool {
        let hit = attacker_next_arrival(self, slot, rng).is_some();
        if hit {
            self.next = match self.strategy {
                AttackStrategy::PeriodicSampling { .. } => {
                    let law = self.gap_law.expect("periodic attacker without gap law");
                    Some(slot + law.sample(rng))
                }
                AttackStrategy::OddSlots => Some(slot + 2),
                // rescheduled by the departure
                AttackStrategy::NonstopMonitor => None,
                AttackStrategy::Silent => None,
            };
        }
        hit
    }

    pub fn on_departure(&mut self, departure_slot: u64) {
        if self.strategy == AttackStrategy::NonstopMonitor {
            self.next = Some(departure_slot);
        }
    }
}

/// Returns `Some(slot)` when the attacker's history schedules an arrival in `slot`.
///
/// The gap draw for the following arrival happens in [`AttackerState::arrives`], so
/// `rng` is only consulted there; it is accepted here to keep the strategy contract
/// in one signature.
pub fn attacker_next_arrival<R: Rng + ?Sized>(history: &AttackerState, slot: u64, _rng: &mut R) -> Option<u64> {
    match history.next {
        Some(next) if next == slot => Some(slot),
        _ => None,
    }
}
