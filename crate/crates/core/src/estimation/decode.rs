//! What the attacker can infer from his own arrival and departure times.

use serde::Serialize;

use crate::analytic::BusyScale;
use crate::error::{LeakError, Result};
use crate::sim::{ArrivalTrace, AttackObservation, Policy};

fn require_nonstop(obs: &AttackObservation) -> Result<()> {
    let a = obs.arrivals();
    let d = obs.departures();
    for k in 1..obs.len() {
        if a[k] != d[k - 1] {
            return Err(LeakError::NotNonstop {
                index: k,
                prev: k - 1,
                arrival: a[k],
                departure: d[k - 1],
            });
        }
    }
    Ok(())
}

/// Reconstructs the user's arrivals from a nonstop probe of a longest-queue-first
/// server: slot `i` had no arrival exactly when some probe departed at `i + 1`.
///
/// The returned trace records the empirical arrival frequency as its rate.
pub fn decode_lqf(obs: &AttackObservation, n: u64) -> Result<ArrivalTrace> {
    obs.validate()?;
    require_nonstop(obs)?;
    let mut slots = vec![true; n as usize];
    for &d in obs.departures() {
        if d >= 2 && d - 1 <= n {
            slots[(d - 2) as usize] = false;
        }
    }
    let rate = if n > 0 {
        slots.iter().filter(|&&x| x).count() as f64 / n as f64
    } else {
        0.0
    };
    Ok(ArrivalTrace::new(slots, rate))
}

/// Per-window user arrival counts recovered from an FCFS observation.
///
/// Window `k` covers slots `start[k]..=end[k]`: from the previous probe arrival
/// (slot 1 for the first window) up to the slot before `A_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledCounts {
    pub start: Vec<u64>,
    pub end: Vec<u64>,
    /// Exact count where `exact_mask` is set, otherwise the lower bound 0.
    pub counts: Vec<u64>,
    /// Exact count where `exact_mask` is set, otherwise the implied upper bound.
    pub upper: Vec<u64>,
    pub exact_mask: Vec<bool>,
}

impl SampledCounts {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Window length `A_k - A_{k-1}` (or `A_1 - 1` for the first window).
    pub fn gap(&self, k: usize) -> u64 {
        if self.end[k] + 1 >= self.start[k] {
            self.end[k] + 1 - self.start[k]
        } else {
            0
        }
    }

    pub fn exact_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.exact_mask.iter().filter(|&&e| e).count() as f64 / self.len() as f64
    }
}

/// Recovers window counts from the FCFS delay law.
///
/// A probe that enqueues ahead of same-slot user arrivals waits behind exactly the
/// backlog left from earlier slots, so `q_k = D_k - A_k - 1`. Between probes the
/// backlog follows `q_k = (q_{k-1} + 1 + X_k - gap_k)+`, which pins `X_k` whenever
/// `q_k > 0` and only bounds it from above otherwise.
pub fn decode_fcfs_counts(obs: &AttackObservation) -> Result<SampledCounts> {
    obs.validate()?;
    let m = obs.len();
    let mut out = SampledCounts {
        start: Vec::with_capacity(m),
        end: Vec::with_capacity(m),
        counts: Vec::with_capacity(m),
        upper: Vec::with_capacity(m),
        exact_mask: Vec::with_capacity(m),
    };
    let mut prev_arrival = 1u64;
    // backlog carried into the window: previous q plus the previous probe itself
    let mut carry = 0i64;
    for k in 0..m {
        let a = obs.arrivals()[k];
        let q = (obs.departures()[k] - a - 1) as i64;
        let gap = (a - prev_arrival) as i64;
        if q > 0 {
            let x = q - carry + gap;
            if x < 0 || x > gap {
                return Err(LeakError::Inconsistent(format!(
                    "window {k} implies {x} user arrivals in {gap} slots"
                )));
            }
            out.counts.push(x as u64);
            out.upper.push(x as u64);
            out.exact_mask.push(true);
        } else {
            let bound = gap - carry;
            if bound < 0 {
                return Err(LeakError::Inconsistent(format!(
                    "window {k}: backlog {carry} cannot drain in {gap} slots"
                )));
            }
            out.counts.push(0);
            out.upper.push(bound as u64);
            out.exact_mask.push(false);
        }
        out.start.push(prev_arrival);
        out.end.push(a - 1);
        prev_arrival = a;
        carry = q + 1;
    }
    Ok(out)
}

/// Lengths of successive busy periods, in slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BusyPeriodSample {
    pub periods: Vec<u64>,
    pub scale: BusyScale,
}

impl BusyPeriodSample {
    pub fn mean(&self) -> f64 {
        if self.periods.is_empty() {
            return f64::NAN;
        }
        self.periods.iter().sum::<u64>() as f64 / self.periods.len() as f64
    }
}

/// Splits the timeline at probes that were served immediately (delay 1), which is
/// when the probe found the user queue empty. Returns the gaps between successive
/// such probes; the segment before the first one is dropped because it does not
/// start from an empty queue.
///
/// Round robin expects a nonstop probe, WC-TDMA a probe in every odd slot.
pub fn extract_busy_periods(obs: &AttackObservation, policy: Policy) -> Result<BusyPeriodSample> {
    let scale = match policy {
        Policy::RoundRobin => BusyScale::RoundRobin,
        Policy::WcTdma => BusyScale::WcTdma,
        other => {
            return Err(LeakError::Unsupported(format!(
                "busy periods are defined for rr and wctdma, not {}",
                other.name()
            )))
        }
    };
    let empties: Vec<u64> = obs
        .arrivals()
        .iter()
        .zip(obs.departures())
        .filter(|(a, d)| **d == **a + 1)
        .map(|(a, _)| *a)
        .collect();
    let periods: Vec<u64> = empties.windows(2).map(|w| w[1] - w[0]).collect();
    let want_odd = scale == BusyScale::RoundRobin;
    if let Some(bad) = periods.iter().find(|&&b| (b % 2 == 1) != want_odd) {
        return Err(LeakError::Inconsistent(format!(
            "busy period of {bad} slots has the wrong parity for {}",
            policy.name()
        )));
    }
    Ok(BusyPeriodSample { periods, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lqf_decoder_marks_departure_slots() {
        // departures at 2 and 4 mean slots 1 and 3 were empty
        let obs = AttackObservation::new(vec![1, 2], vec![2, 4]);
        let tr = decode_lqf(&obs, 4).unwrap();
        assert_eq!(tr.slots(), &[false, true, false, true]);
    }

    #[test]
    fn lqf_decoder_rejects_gaps() {
        let obs = AttackObservation::new(vec![1, 3], vec![2, 4]);
        assert!(matches!(decode_lqf(&obs, 4), Err(LeakError::NotNonstop { .. })));
    }

    #[test]
    fn fcfs_decoder_by_hand() {
        // probes at 1, 3, 5; backlogs 0, 1, 0
        let obs = AttackObservation::new(vec![1, 3, 5], vec![2, 5, 6]);
        let c = decode_fcfs_counts(&obs).unwrap();
        assert_eq!(c.exact_mask, vec![false, true, false]);
        // window 2: q = 1 = 0 + 1 + X - 2  =>  X = 2
        assert_eq!(c.counts, vec![0, 2, 0]);
        // window 3: carry 2, gap 2 => upper bound 0
        assert_eq!(c.upper, vec![0, 2, 0]);
        assert_eq!(c.gap(1), 2);
    }

    #[test]
    fn fcfs_decoder_flags_impossible_backlog() {
        let obs = AttackObservation::new(vec![1, 2], vec![5, 6]);
        assert!(decode_fcfs_counts(&obs).is_err());
    }

    #[test]
    fn busy_periods_between_empty_probes() {
        let obs = AttackObservation::new(vec![1, 2, 4, 6, 7], vec![2, 4, 6, 7, 8]);
        let s = extract_busy_periods(&obs, Policy::RoundRobin).unwrap();
        assert_eq!(s.periods, vec![5, 1]);
        assert!(extract_busy_periods(&obs, Policy::Fcfs).is_err());
    }
}
