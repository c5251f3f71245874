use std::io::Write;

use super::{Served, SimOutput};
use crate::error::{LeakError, Result};

/// The user's arrival indicators over slots `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTrace {
    slots: Vec<bool>,
    lambda: f64,
}

impl ArrivalTrace {
    pub fn new(slots: Vec<bool>, lambda: f64) -> Self {
        ArrivalTrace { slots, lambda }
    }

    pub fn horizon(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn slots(&self) -> &[bool] {
        &self.slots
    }

    /// Indicator for 1-indexed `slot`.
    pub fn at(&self, slot: u64) -> bool {
        self.slots[(slot - 1) as usize]
    }

    /// N(t): number of user arrivals in slots `1..=t`.
    pub fn cumulative_count(&self, t: u64) -> u64 {
        self.slots[..t as usize].iter().filter(|&&d| d).count() as u64
    }

    /// N(t) for every t, as a vector indexed by `t - 1`.
    pub fn cumulative_user_count(&self) -> Vec<u64> {
        self.slots
            .iter()
            .scan(0u64, |acc, &d| {
                *acc += d as u64;
                Some(*acc)
            })
            .collect()
    }

    /// Arrivals in the inclusive slot range `from..=to` (empty when `to < from`).
    pub fn count_between(&self, from: u64, to: u64) -> u64 {
        if to < from {
            return 0;
        }
        self.slots[(from - 1) as usize..to as usize].iter().filter(|&&d| d).count() as u64
    }
}

/// The attacker's complete view: his own arrival and departure slots.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttackObservation {
    arrivals: Vec<u64>,
    departures: Vec<u64>,
}

impl AttackObservation {
    pub fn new(arrivals: Vec<u64>, departures: Vec<u64>) -> Self {
        AttackObservation { arrivals, departures }
    }

    /// Checks equal lengths, strictly increasing sequences and `D_k >= A_k + 1`.
    pub fn validate(&self) -> Result<()> {
        if self.arrivals.len() != self.departures.len() {
            return Err(LeakError::Inconsistent(format!(
                "{} arrivals vs {} departures",
                self.arrivals.len(),
                self.departures.len()
            )));
        }
        for w in self.arrivals.windows(2) {
            if w[1] <= w[0] {
                return Err(LeakError::Inconsistent("arrivals not strictly increasing".into()));
            }
        }
        for w in self.departures.windows(2) {
            if w[1] <= w[0] {
                return Err(LeakError::Inconsistent("departures not strictly increasing".into()));
            }
        }
        for (k, (a, d)) in self.arrivals.iter().zip(&self.departures).enumerate() {
            if *d < a + 1 {
                return Err(LeakError::Inconsistent(format!("job {k} departs at {d} before service of arrival {a}")));
            }
        }
        Ok(())
    }

    /// m: number of jobs with a recorded departure.
    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn arrivals(&self) -> &[u64] {
        &self.arrivals
    }

    pub fn departures(&self) -> &[u64] {
        &self.departures
    }

    /// `D_k - A_k` for every job.
    pub fn delays(&self) -> impl Iterator<Item = u64> + '_ {
        self.arrivals.iter().zip(&self.departures).map(|(a, d)| d - a)
    }

    /// S_k = max(A_k, D_{k-1}): earliest slot in which job k can be served.
    pub fn service_starts(&self) -> Vec<u64> {
        let mut prev = 0;
        self.arrivals
            .iter()
            .zip(&self.departures)
            .map(|(&a, &d)| {
                let s = a.max(prev);
                prev = d;
                s
            })
            .collect()
    }

    /// True when every arrival after the first coincides with the previous departure.
    pub fn is_nonstop(&self) -> bool {
        (1..self.len()).all(|k| self.arrivals[k] == self.departures[k - 1])
    }
}

/// Per-slot queue state, recorded after the slot's arrivals and before service.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueueTrace {
    user_queue_len: Vec<u32>,
    attacker_queue_len: Vec<u32>,
    attacker_arrival: Vec<bool>,
    served: Vec<Served>,
}

impl QueueTrace {
    pub(crate) fn with_capacity(n: usize) -> Self {
        QueueTrace {
            user_queue_len: Vec::with_capacity(n),
            attacker_queue_len: Vec::with_capacity(n),
            attacker_arrival: Vec::with_capacity(n),
            served: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, user: u32, attacker: u32, attacker_arrived: bool, served: Served) {
        self.user_queue_len.push(user);
        self.attacker_queue_len.push(attacker);
        self.attacker_arrival.push(attacker_arrived);
        self.served.push(served);
    }

    pub fn horizon(&self) -> u64 {
        self.served.len() as u64
    }

    /// q(t): user jobs in the buffer at the beginning of `slot`, after arrivals.
    pub fn user_queue_len(&self) -> &[u32] {
        &self.user_queue_len
    }

    pub fn attacker_queue_len(&self) -> &[u32] {
        &self.attacker_queue_len
    }

    pub fn served(&self) -> &[Served] {
        &self.served
    }

    pub fn user_at(&self, slot: u64) -> u32 {
        self.user_queue_len[(slot - 1) as usize]
    }

    pub fn attacker_at(&self, slot: u64) -> u32 {
        self.attacker_queue_len[(slot - 1) as usize]
    }

    pub fn served_at(&self, slot: u64) -> Served {
        self.served[(slot - 1) as usize]
    }

    pub fn attacker_arrived_at(&self, slot: u64) -> bool {
        self.attacker_arrival[(slot - 1) as usize]
    }

    /// Jobs of both sources left over from earlier slots, i.e. the backlog a job
    /// arriving in `slot` finds ahead of it when it enqueues before same-slot arrivals.
    pub fn backlog_before_arrivals(&self, slot: u64, delta: &ArrivalTrace) -> u32 {
        let i = (slot - 1) as usize;
        self.user_queue_len[i] + self.attacker_queue_len[i] - delta.at(slot) as u32 - self.attacker_arrival[i] as u32
    }

    /// Time-averaged user queue length.
    pub fn mean_user_queue(&self) -> f64 {
        if self.user_queue_len.is_empty() {
            return 0.0;
        }
        self.user_queue_len.iter().map(|&q| q as f64).sum::<f64>() / self.user_queue_len.len() as f64
    }
}

/// Writes `slot,delta,attacker_arrival,served,q_user,q_attacker`, one LF-terminated
/// line per slot. Queue lengths are taken after the slot's arrivals.
pub fn write_trace_dump<W: Write>(out: &SimOutput, mut w: W) -> Result<()> {
    let q = &out.queues;
    for t in 1..=q.horizon() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            t,
            out.arrivals.at(t) as u8,
            q.attacker_arrived_at(t) as u8,
            q.served_at(t).code(),
            q.user_at(t),
            q.attacker_at(t)
        )?;
    }
    Ok(())
}
