use serde::{Deserialize, Serialize};

/// Service policy of the shared server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    Fcfs,
    Lqf,
    RoundRobin,
    /// Odd slots reserved for the user, even slots for the attacker; an idle owner's
    /// slot goes to the other source.
    WcTdma,
    /// Same reservation as [`Policy::WcTdma`] but idles when the owner has no job.
    Tdma,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Fcfs => "fcfs",
            Policy::Lqf => "lqf",
            Policy::RoundRobin => "rr",
            Policy::WcTdma => "wctdma",
            Policy::Tdma => "tdma",
        }
    }

    pub fn parse(s: &str) -> Option<Policy> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fcfs" => Some(Policy::Fcfs),
            "lqf" => Some(Policy::Lqf),
            "rr" | "roundrobin" => Some(Policy::RoundRobin),
            "wctdma" => Some(Policy::WcTdma),
            "tdma" => Some(Policy::Tdma),
            _ => None,
        }
    }

    pub fn is_work_conserving(self) -> bool {
        self != Policy::Tdma
    }
}

/// Who wins a tie. For FCFS this is the enqueue order of same-slot arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    UserFirst,
    AttackerFirst,
}

impl TieBreak {
    pub fn default_for(policy: Policy) -> TieBreak {
        match policy {
            Policy::Fcfs => TieBreak::AttackerFirst,
            _ => TieBreak::UserFirst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    User,
    Attacker,
}

/// Outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Served {
    User,
    Attacker,
    Idle,
}

impl Served {
    pub fn code(self) -> char {
        match self {
            Served::User => 'U',
            Served::Attacker => 'A',
            Served::Idle => '-',
        }
    }
}

/// What the scheduler sees at the start of a slot, after that slot's arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueView {
    pub user_len: u32,
    pub attacker_len: u32,
    /// Oldest queued job across both sources (FCFS only).
    pub fifo_head: Option<Source>,
    /// Source served most recently (round robin turn pointer).
    pub last_served: Source,
}

/// Picks the job served in `slot` (1-indexed). Total on every valid view.
pub fn scheduler_step(policy: Policy, tie_break: TieBreak, view: &QueueView, slot: u64) -> Served {
    let user = view.user_len > 0;
    let attacker = view.attacker_len > 0;
    if !user && !attacker {
        return Served::Idle;
    }
    match policy {
        Policy::Fcfs => match view.fifo_head {
            Some(Source::User) => Served::User,
            Some(Source::Attacker) => Served::Attacker,
            None => unreachable!("FCFS view with queued jobs but no fifo head"),
        },
        Policy::Lqf => match view.user_len.cmp(&view.attacker_len) {
            std::cmp::Ordering::Greater => Served::User,
            std::cmp::Ordering::Less => Served::Attacker,
            std::cmp::Ordering::Equal => match tie_break {
                TieBreak::UserFirst => Served::User,
                TieBreak::AttackerFirst => Served::Attacker,
            },
        },
        Policy::RoundRobin => match (user, attacker) {
            (true, true) => match view.last_served {
                Source::User => Served::Attacker,
                Source::Attacker => Served::User,
            },
            (true, false) => Served::User,
            _ => Served::Attacker,
        },
        Policy::WcTdma => {
            let user_slot = slot % 2 == 1;
            match (user_slot, user, attacker) {
                (true, true, _) => Served::User,
                (true, false, _) => Served::Attacker,
                (false, _, true) => Served::Attacker,
                (false, _, false) => Served::User,
            }
        }
        Policy::Tdma => {
            let user_slot = slot % 2 == 1;
            match (user_slot, user, attacker) {
                (true, true, _) => Served::User,
                (false, _, true) => Served::Attacker,
                _ => Served::Idle,
            }
        }
    }
}
