use std::collections::VecDeque;

use leaklab::sim::{
    run_simulation, scheduler_step, simulate_with_arrivals, write_trace_dump, AttackStrategy, Policy, QueueView,
    Served, SimConfig, SimOutput, Source, TieBreak,
};

/// A from-scratch replay of the two-queue server. It reads both arrival streams from
/// the recorded trace and recomputes every service decision and attacker departure.
fn replay(out: &SimOutput, policy: Policy, tie: TieBreak) -> (Vec<Served>, Vec<u64>, Vec<u64>) {
    let n = out.queues.horizon();
    let mut user = 0u32;
    let mut attacker: VecDeque<u64> = VecDeque::new();
    let mut fifo: VecDeque<Source> = VecDeque::new();
    let mut last = match tie {
        TieBreak::UserFirst => Source::Attacker,
        TieBreak::AttackerFirst => Source::User,
    };
    let mut served = Vec::new();
    let mut a = Vec::new();
    let mut d = Vec::new();
    for t in 1..=n {
        let du = out.arrivals.at(t);
        let da = out.queues.attacker_arrived_at(t);
        let mut order = vec![];
        match tie {
            TieBreak::AttackerFirst => {
                if da {
                    order.push(Source::Attacker)
                }
                if du {
                    order.push(Source::User)
                }
            }
            TieBreak::UserFirst => {
                if du {
                    order.push(Source::User)
                }
                if da {
                    order.push(Source::Attacker)
                }
            }
        }
        for s in order {
            fifo.push_back(s);
            match s {
                Source::User => user += 1,
                Source::Attacker => attacker.push_back(t),
            }
        }
        let has_u = user > 0;
        let has_a = !attacker.is_empty();
        let pick = if !has_u && !has_a {
            None
        } else {
            match policy {
                Policy::Fcfs => fifo.front().copied(),
                Policy::Lqf => {
                    let al = attacker.len() as u32;
                    Some(if user > al {
                        Source::User
                    } else if al > user {
                        Source::Attacker
                    } else if tie == TieBreak::UserFirst {
                        Source::User
                    } else {
                        Source::Attacker
                    })
                }
                Policy::RoundRobin => Some(if has_u && has_a {
                    if last == Source::User {
                        Source::Attacker
                    } else {
                        Source::User
                    }
                } else if has_u {
                    Source::User
                } else {
                    Source::Attacker
                }),
                Policy::WcTdma => {
                    let owner = if t % 2 == 1 { Source::User } else { Source::Attacker };
                    let owner_has = if owner == Source::User { has_u } else { has_a };
                    Some(if owner_has {
                        owner
                    } else if owner == Source::User {
                        Source::Attacker
                    } else {
                        Source::User
                    })
                }
                Policy::Tdma => {
                    if t % 2 == 1 {
                        has_u.then_some(Source::User)
                    } else {
                        has_a.then_some(Source::Attacker)
                    }
                }
            }
        };
        match pick {
            None => served.push(Served::Idle),
            Some(s) => {
                last = s;
                if let Some(pos) = fifo.iter().position(|&x| x == s) {
                    fifo.remove(pos);
                }
                match s {
                    Source::User => {
                        user -= 1;
                        served.push(Served::User);
                    }
                    Source::Attacker => {
                        a.push(attacker.pop_front().unwrap());
                        d.push(t + 1);
                        served.push(Served::Attacker);
                    }
                }
            }
        }
    }
    (served, a, d)
}

fn all_configs() -> Vec<SimConfig> {
    let mut v = Vec::new();
    let mut seed = 1;
    for policy in [Policy::Fcfs, Policy::Lqf, Policy::RoundRobin, Policy::WcTdma, Policy::Tdma] {
        for attacker in [
            AttackStrategy::NonstopMonitor,
            AttackStrategy::PeriodicSampling { omega: 0.3 },
            AttackStrategy::PeriodicSampling { omega: 0.45 },
            AttackStrategy::OddSlots,
            AttackStrategy::Silent,
        ] {
            for lambda in [0.0, 0.2, 0.45] {
                for tie in [TieBreak::UserFirst, TieBreak::AttackerFirst] {
                    seed += 1;
                    v.push(SimConfig::new(policy, attacker, lambda, 20_000, seed).with_tie_break(tie));
                }
            }
        }
    }
    v
}

#[test]
fn replay_oracle_reproduces_every_run() {
    for cfg in all_configs() {
        let out = run_simulation(&cfg).unwrap();
        let (served, a, d) = replay(&out, cfg.policy, cfg.tie_break);
        assert_eq!(served.as_slice(), out.queues.served(), "{cfg:?}");
        // jobs still queued or in service at the horizon are dropped from the observation
        let n = cfg.horizon;
        let m = d.iter().take_while(|&&x| x <= n + 1).count();
        assert_eq!(out.observation.arrivals(), &a[..m], "{cfg:?}");
        assert_eq!(out.observation.departures(), &d[..m], "{cfg:?}");
    }
}

#[test]
fn work_conservation() {
    for cfg in all_configs() {
        let out = run_simulation(&cfg).unwrap();
        let q = &out.queues;
        for t in 1..=cfg.horizon {
            let busy = q.user_at(t) + q.attacker_at(t) > 0;
            let s = q.served_at(t);
            if cfg.policy.is_work_conserving() {
                assert_eq!(busy, s != Served::Idle, "{cfg:?} slot {t}");
            } else if s == Served::Idle {
                let owner_len = if t % 2 == 1 { q.user_at(t) } else { q.attacker_at(t) };
                assert_eq!(owner_len, 0, "tdma idled with a queued owner job at slot {t}");
            }
        }
    }
}

#[test]
fn observation_and_queue_invariants() {
    for cfg in all_configs() {
        let out = run_simulation(&cfg).unwrap();
        out.observation.validate().unwrap();
        let obs = &out.observation;
        assert_eq!(obs.arrivals().len(), obs.departures().len());
        assert!(obs.arrivals().windows(2).all(|w| w[0] < w[1]));
        assert!(obs.departures().windows(2).all(|w| w[0] < w[1]));
        assert!(obs.arrivals().iter().zip(obs.departures()).all(|(a, d)| *d > *a));
        assert!(obs.arrivals().iter().all(|&a| a <= cfg.horizon));
        if cfg.attacker == AttackStrategy::NonstopMonitor {
            assert!(obs.is_nonstop());
            for k in 1..obs.len() {
                assert_eq!(obs.arrivals()[k], obs.departures()[k - 1]);
            }
        }
        let q = out.queues.user_queue_len();
        assert_eq!(q.len() as u64, cfg.horizon);
        assert!(q.windows(2).all(|w| (w[1] as i64 - w[0] as i64).abs() <= 1));
        let cum = out.arrivals.cumulative_user_count();
        let mut running = 0;
        for t in 1..=cfg.horizon {
            running += out.arrivals.at(t) as u64;
            assert_eq!(cum[(t - 1) as usize], running);
        }
        assert_eq!(out.arrivals.slots().len() as u64, cfg.horizon);
    }
}

#[test]
fn fcfs_delay_reveals_backlog() {
    for tie in [TieBreak::AttackerFirst, TieBreak::UserFirst] {
        for omega in [0.2, 0.45, 0.69] {
            let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega }, 0.3, 100_000, 9)
                .with_tie_break(tie);
            let out = run_simulation(&cfg).unwrap();
            let obs = &out.observation;
            for (&a, &d) in obs.arrivals().iter().zip(obs.departures()) {
                let user_ahead = out.queues.user_at(a) - (tie == TieBreak::AttackerFirst && out.arrivals.at(a)) as u32;
                let backlog = user_ahead + out.queues.attacker_at(a) - 1;
                assert_eq!(d - a - 1, backlog as u64);
                if tie == TieBreak::AttackerFirst {
                    assert_eq!(backlog, out.queues.backlog_before_arrivals(a, &out.arrivals));
                }
            }
        }
    }
}

#[test]
fn rr_nonstop_delays_flag_empty_queue() {
    let l = 0.3;
    let cfg = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, l, 1_000_000, 5);
    let out = run_simulation(&cfg).unwrap();
    let obs = &out.observation;
    let mut long = 0u64;
    let mut total = 0u64;
    for (&a, &d) in obs.arrivals().iter().zip(obs.departures()) {
        let delay = d - a;
        assert!(delay == 1 || delay == 2);
        assert_eq!(delay == 1, out.queues.user_at(a) == 0);
        total += delay;
        if delay == 2 {
            long += 2;
        }
    }
    // slots spent in two-slot probes = slots with a user job served = 2 lambda
    let frac = long as f64 / total as f64;
    assert!((frac - 2.0 * l).abs() < 0.01, "{frac}");
    let probes = obs.len() as f64;
    let long_probes = long as f64 / 2.0;
    assert!((long_probes / probes - l / (1.0 - l)).abs() < 0.01);
}

#[test]
fn wctdma_odd_probe_delays() {
    let cfg = SimConfig::new(Policy::WcTdma, AttackStrategy::OddSlots, 0.35, 200_000, 8);
    let out = run_simulation(&cfg).unwrap();
    let obs = &out.observation;
    for (&a, &d) in obs.arrivals().iter().zip(obs.departures()) {
        let delay = d - a;
        assert!(delay == 1 || delay == 2);
        let fresh = out.arrivals.at(a);
        let before = out.queues.user_at(a) - fresh as u32;
        assert_eq!(delay == 1, before == 0 && !fresh);
    }
}

#[test]
fn determinism_and_stream_separation() {
    let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, 0.4, 50_000, 77);
    assert_eq!(run_simulation(&cfg).unwrap(), run_simulation(&cfg).unwrap());
    let other = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.3 }, 0.4, 50_000, 77);
    assert_eq!(
        run_simulation(&cfg).unwrap().arrivals,
        run_simulation(&other).unwrap().arrivals
    );
    let reseeded = cfg.clone().with_seed(78);
    assert_ne!(run_simulation(&cfg).unwrap().arrivals, run_simulation(&reseeded).unwrap().arrivals);
}

#[test]
fn stability_below_capacity() {
    for (l, w) in [(0.3, 0.6), (0.5, 0.45), (0.1, 0.85)] {
        let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: w }, l, 1_000_000, 3);
        let out = run_simulation(&cfg).unwrap();
        let mean = out.queues.mean_user_queue();
        assert!(mean.is_finite() && mean < 100.0, "lambda {l} omega {w}: mean queue {mean}");
        let tail = out.queues.user_queue_len()[900_000..].iter().map(|&q| q as f64).sum::<f64>() / 100_000.0;
        assert!(tail < 200.0);
    }
}

#[test]
fn empty_system_serves_immediately() {
    let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.5 }, 0.0, 10_000, 1);
    let out = run_simulation(&cfg).unwrap();
    let obs = &out.observation;
    assert!(!obs.is_empty());
    assert!(obs.delays().all(|d| d == 1));
    assert!(obs.arrivals().windows(2).all(|w| w[1] - w[0] == 2));
}

#[test]
fn odd_slot_probes() {
    let cfg = SimConfig::new(Policy::WcTdma, AttackStrategy::OddSlots, 0.2, 1001, 4);
    let out = run_simulation(&cfg).unwrap();
    for (k, &a) in out.observation.arrivals().iter().enumerate() {
        assert_eq!(a, 2 * k as u64 + 1);
    }
}

#[test]
fn periodic_gap_mixture() {
    let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.4 }, 0.0, 1_000_000, 12);
    let out = run_simulation(&cfg).unwrap();
    let a = out.observation.arrivals();
    let gaps: Vec<u64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(gaps.iter().all(|&g| g == 2 || g == 3));
    let twos = gaps.iter().filter(|&&g| g == 2).count() as f64 / gaps.len() as f64;
    assert!((twos - 0.5).abs() < 0.01, "{twos}");
}

#[test]
fn silent_attacker_observes_nothing() {
    let cfg = SimConfig::new(Policy::RoundRobin, AttackStrategy::Silent, 0.4, 5000, 2);
    assert!(run_simulation(&cfg).unwrap().observation.is_empty());
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        SimConfig::new(Policy::Fcfs, AttackStrategy::Silent, 0.3, 0, 1),
        SimConfig::new(Policy::Fcfs, AttackStrategy::Silent, 1.0, 10, 1),
        SimConfig::new(Policy::Fcfs, AttackStrategy::Silent, -0.1, 10, 1),
        SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.7 }, 0.3, 10, 1),
        SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.0 }, 0.3, 10, 1),
        SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, 0.6, 10, 1),
        SimConfig::new(Policy::WcTdma, AttackStrategy::OddSlots, 0.6, 10, 1),
    ];
    for cfg in bad {
        assert!(run_simulation(&cfg).is_err(), "{cfg:?}");
    }
    let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::Silent, 0.3, 10, 1);
    assert!(simulate_with_arrivals(&cfg, vec![true; 9]).is_err());
}

#[test]
fn scheduler_step_examples() {
    let view = |u, a, last| QueueView {
        user_len: u,
        attacker_len: a,
        fifo_head: None,
        last_served: last,
    };
    assert_eq!(
        scheduler_step(Policy::Lqf, TieBreak::UserFirst, &view(1, 1, Source::User), 4),
        Served::User
    );
    assert_eq!(
        scheduler_step(Policy::Lqf, TieBreak::AttackerFirst, &view(1, 1, Source::User), 4),
        Served::Attacker
    );
    assert_eq!(
        scheduler_step(Policy::WcTdma, TieBreak::UserFirst, &view(0, 1, Source::User), 3),
        Served::Attacker
    );
    assert_eq!(
        scheduler_step(Policy::RoundRobin, TieBreak::UserFirst, &view(2, 1, Source::User), 8),
        Served::Attacker
    );
    assert_eq!(
        scheduler_step(Policy::Tdma, TieBreak::UserFirst, &view(0, 1, Source::User), 3),
        Served::Idle
    );
    assert_eq!(
        scheduler_step(Policy::Lqf, TieBreak::UserFirst, &view(0, 0, Source::User), 3),
        Served::Idle
    );
}

#[test]
fn trace_dump_lines() {
    let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.5 }, 0.0, 4, 1);
    let out = run_simulation(&cfg).unwrap();
    let mut buf = Vec::new();
    write_trace_dump(&out, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    for (i, line) in lines.iter().enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        assert_eq!(f[0], (i + 1).to_string());
        assert!(["U", "A", "-"].contains(&f[3]));
    }
}
