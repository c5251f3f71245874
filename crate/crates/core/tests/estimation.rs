use approx::assert_abs_diff_eq;

use leaklab::analytic::{
    binary_entropy, binomial_entropy, busy_period_pmf, leakage_rr_lower, BusyScale, LeakageKind, DEFAULT_TAIL_EPS,
};
use leaklab::estimation::*;
use leaklab::sim::{run_simulation, trial_seed, AttackObservation, AttackStrategy, Policy, SimConfig, TieBreak};
use leaklab::LeakError;

fn window_sum(delta: &[bool], start: u64, end: u64) -> u64 {
    if end < start {
        return 0;
    }
    delta[(start - 1) as usize..end as usize].iter().filter(|&&d| d).count() as u64
}

#[test]
fn lqf_decoder_is_exact_on_interior_slots() {
    for tie in [TieBreak::UserFirst, TieBreak::AttackerFirst] {
        for i in 1..=9 {
            let l = i as f64 / 10.0;
            for s in 0..3 {
                let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, l, 50_000, trial_seed(31, s))
                    .with_tie_break(tie);
                let out = run_simulation(&cfg).unwrap();
                let decoded = decode_lqf(&out.observation, cfg.horizon).unwrap();
                let start = lqf_interior_start(&out, tie);
                let errors = (start..=cfg.horizon).filter(|&t| decoded.at(t) != out.arrivals.at(t)).count();
                assert_eq!(errors, 0, "lambda {l} {tie:?} seed {s}");
            }
        }
    }
}

#[test]
fn lqf_decoder_long_runs() {
    let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, 0.3, 1_000_000, 5);
    let out = run_simulation(&cfg).unwrap();
    assert_eq!(decode_lqf(&out.observation, cfg.horizon).unwrap().slots(), out.arrivals.slots());

    let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, 0.7, 200_000, 6)
        .with_tie_break(TieBreak::AttackerFirst);
    let out = run_simulation(&cfg).unwrap();
    let decoded = decode_lqf(&out.observation, cfg.horizon).unwrap();
    let start = lqf_interior_start(&out, TieBreak::AttackerFirst);
    assert!((start..=cfg.horizon).all(|t| decoded.at(t) == out.arrivals.at(t)));
}

#[test]
fn lqf_decoder_edge_cases() {
    let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, 0.0, 1000, 1);
    let out = run_simulation(&cfg).unwrap();
    assert!(decode_lqf(&out.observation, 1000).unwrap().slots().iter().all(|&d| !d));
    let gap = AttackObservation::new(vec![1, 5], vec![2, 6]);
    assert!(matches!(decode_lqf(&gap, 10), Err(LeakError::NotNonstop { .. })));
}

#[test]
fn fcfs_counts_match_true_arrivals() {
    for (l, w) in [(0.2, 0.3), (0.5, 0.45), (0.5, 0.25), (0.7, 0.29), (0.05, 0.9)] {
        for s in 0..3 {
            let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: w }, l, 100_000, trial_seed(8, s));
            let out = run_simulation(&cfg).unwrap();
            let c = decode_fcfs_counts(&out.observation).unwrap();
            let delta = out.arrivals.slots();
            let mut exact_total = 0;
            let mut true_total = 0;
            for k in 0..c.len() {
                let truth = window_sum(delta, c.start[k], c.end[k]);
                assert!(c.counts[k] <= c.gap(k));
                assert!(c.counts[k] <= truth && truth <= c.upper[k], "window {k}: {truth} outside bounds");
                if c.exact_mask[k] {
                    assert_eq!(c.counts[k], truth);
                    exact_total += c.counts[k];
                    true_total += truth;
                }
            }
            assert_eq!(exact_total, true_total);
        }
    }
}

#[test]
fn fcfs_counts_empty_system_and_bad_input() {
    let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.5 }, 0.0, 10_000, 2);
    let c = decode_fcfs_counts(&run_simulation(&cfg).unwrap().observation).unwrap();
    assert!(!c.is_empty());
    assert!(c.exact_mask.iter().all(|&e| !e));
    assert!(c.counts.iter().all(|&x| x == 0));
    assert_eq!(c.exact_fraction(), 0.0);
    // a backlog of 5 cannot appear after one slot
    let bad = AttackObservation::new(vec![2], vec![9]);
    assert!(matches!(decode_fcfs_counts(&bad), Err(LeakError::Inconsistent(_))));
}

#[test]
fn fcfs_exact_fraction_grows_toward_the_limit() {
    let l = 0.5;
    let frac = |w: f64| {
        let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: w }, l, 1_000_000, 17);
        decode_fcfs_counts(&run_simulation(&cfg).unwrap().observation).unwrap().exact_fraction()
    };
    let near = frac(1.0 - l - 0.01);
    let half = frac((1.0 - l) / 2.0);
    assert!(near > 0.9 && near > half, "{near} vs {half}");
}

#[test]
fn busy_periods_have_the_right_parity_and_mean() {
    for (policy, attacker) in [
        (Policy::RoundRobin, AttackStrategy::NonstopMonitor),
        (Policy::WcTdma, AttackStrategy::OddSlots),
    ] {
        for l in [0.0, 0.1, 0.3, 0.45] {
            let cfg = SimConfig::new(policy, attacker, l, 200_000, 13);
            let b = extract_busy_periods(&run_simulation(&cfg).unwrap().observation, policy).unwrap();
            let odd = policy == Policy::RoundRobin;
            assert!(b.periods.iter().all(|&p| (p % 2 == 1) == odd));
            if l == 0.0 {
                assert!(b.periods.iter().all(|&p| p == if odd { 1 } else { 2 }));
            }
        }
    }
    let l = 0.3;
    let rr = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, l, 1_000_000, 21);
    let b = extract_busy_periods(&run_simulation(&rr).unwrap().observation, Policy::RoundRobin).unwrap();
    assert!((b.mean() - 2.5).abs() / 2.5 < 0.01, "{}", b.mean());
    let wc = SimConfig::new(Policy::WcTdma, AttackStrategy::OddSlots, l, 1_000_000, 21);
    let b = extract_busy_periods(&run_simulation(&wc).unwrap().observation, Policy::WcTdma).unwrap();
    assert_eq!(b.scale, BusyScale::WcTdma);
    assert!((b.mean() - 3.5).abs() / 3.5 < 0.01, "{}", b.mean());
    let f = SimConfig::new(Policy::Fcfs, AttackStrategy::NonstopMonitor, l, 1000, 1);
    assert!(extract_busy_periods(&run_simulation(&f).unwrap().observation, Policy::Fcfs).is_err());
}

#[test]
fn busy_period_pmf_converges_in_total_variation() {
    for l in [0.1, 0.25, 0.4] {
        let mean = 1.0 / (1.0 - 2.0 * l);
        // enough slots for about a million periods
        let horizon = (1_050_000.0 * mean) as u64;
        let cfg = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, l, horizon, 44);
        let b = extract_busy_periods(&run_simulation(&cfg).unwrap().observation, Policy::RoundRobin).unwrap();
        assert!(b.periods.len() >= 1_000_000);
        let table = CountTable::from_samples(&b.periods);
        let tv = total_variation(&table, &busy_period_pmf(l, DEFAULT_TAIL_EPS).unwrap());
        assert!(tv < 0.01, "lambda {l}: tv {tv}");
    }
}

#[test]
fn entropy_estimator_examples() {
    let bits: Vec<u64> = leaklab::sim::draw_user_arrivals(0.5, 1_000_000, 3).into_iter().map(u64::from).collect();
    let e = empirical_entropy_rate(&bits, 1).unwrap();
    assert!((e.bits - 1.0).abs() < 0.01);
    assert!(e.ci_low <= e.bits && e.bits <= e.ci_high);
    assert_eq!(e.samples, 1_000_000);
    assert!(!e.undersampled);

    let constant = vec![7u64; 20_000];
    let e = empirical_entropy_rate(&constant, 1).unwrap();
    assert_eq!(e.bits, 0.0);
    assert_eq!(e.distinct, 1);

    assert!(matches!(
        empirical_entropy_rate(&[1, 2, 3], 1),
        Err(LeakError::InsufficientSamples { needed: 10_000, got: 3 })
    ));

    let wide: Vec<u64> = (0..20_000).collect();
    assert!(empirical_entropy_rate(&wide, 1).unwrap().undersampled);
}

#[test]
fn busy_period_entropy_matches_dp() {
    let l = 0.25;
    let cfg = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, l, 1_000_000, 77);
    let b = extract_busy_periods(&run_simulation(&cfg).unwrap().observation, Policy::RoundRobin).unwrap();
    let e = empirical_entropy_rate(&b.periods, 5).unwrap();
    let dp = busy_period_pmf(l, DEFAULT_TAIL_EPS).unwrap().entropy;
    assert!((e.bits - dp).abs() / dp < 0.02, "{} vs {dp}", e.bits);
}

#[test]
fn bootstrap_is_reproducible() {
    let samples: Vec<u64> = (0..50_000u64).map(|i| (i * 7919) % 13).collect();
    let a = empirical_entropy_rate(&samples, 9).unwrap();
    let b = empirical_entropy_rate(&samples, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(BOOTSTRAP_RESAMPLES, 200);
}

#[test]
fn wilson_interval_brackets_the_proportion() {
    let (lo, hi) = wilson_interval(50, 100);
    assert!(lo < 0.5 && 0.5 < hi);
    assert!((hi - lo - 0.19).abs() < 0.01);
    let (lo, hi) = wilson_interval(100, 100);
    assert!(hi >= 1.0 - 1e-12 && lo > 0.95);
}

#[test]
fn brute_force_examples() {
    let r = brute_force_sampling_entropy(6, 3, 0.3).unwrap();
    assert_eq!(r.best_pattern, vec![2, 4, 6]);
    assert_abs_diff_eq!(r.best_entropy, 3.0 * binomial_entropy(2, 0.3).unwrap(), epsilon = 1e-10);
    assert!(r.maximizer_in_class);

    for n in [1u64, 4, 9] {
        let r = brute_force_sampling_entropy(n, n, 0.35).unwrap();
        assert_abs_diff_eq!(r.best_entropy, n as f64 * binary_entropy(0.35).unwrap(), epsilon = 1e-10);
    }

    let r = brute_force_sampling_entropy(7, 3, 0.4).unwrap();
    let mut prev = 0;
    for &a in &r.best_pattern {
        assert!(a - prev == 2 || a - prev == 3);
        prev = a;
    }
    assert!(r.maximizer_in_class);
    assert_abs_diff_eq!(r.best_entropy, r.uniform_entropy, epsilon = 1e-10);

    assert!(brute_force_sampling_entropy(MAX_BRUTE_FORCE_HORIZON + 1, 3, 0.4).is_err());
    assert!(brute_force_sampling_entropy(5, 0, 0.4).is_err());
}

#[test]
fn pattern_entropy_agrees_with_enumeration() {
    let r = brute_force_sampling_entropy(8, 3, 0.2).unwrap();
    assert_abs_diff_eq!(
        pattern_entropy_closed_form(&r.best_pattern, 0.2).unwrap(),
        r.best_entropy,
        epsilon = 1e-10
    );
}

#[test]
fn convexity_examples() {
    for l in [0.5, 0.01] {
        let r = midpoint_convexity_check(l, 40).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_violation <= 1e-10);
        assert!(r.max_equality_gap <= 1e-10);
        assert_eq!(r.pairs_checked, 40 * 41 / 2);
    }
    assert!(midpoint_convexity_check(0.3, 61).is_err());
    for i in 1..=9 {
        let r = interpolation_convexity_check(i as f64 / 10.0, 40, 16).unwrap();
        assert!(r.min_second_difference >= -1e-12);
    }
}

#[test]
fn empirical_leakage_examples() {
    for l in [0.2, 0.6] {
        let cfg = SimConfig::new(Policy::Lqf, AttackStrategy::NonstopMonitor, l, 100_000, 3);
        let e = empirical_leakage(&cfg, 2).unwrap();
        assert!((e.result.ratio - 1.0).abs() <= 0.01);
        assert_eq!(e.result.kind, LeakageKind::Empirical);
    }

    let l = 0.25;
    let cfg = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, l, 500_000, 3);
    let e = empirical_leakage(&cfg, 2).unwrap();
    let bound = leakage_rr_lower(l).unwrap().bits_per_slot;
    let (_, hi) = e.result.ci.unwrap();
    assert!(hi >= bound, "empirical {} ci high {hi} vs bound {bound}", e.result.bits_per_slot);

    let cfg = SimConfig::new(Policy::WcTdma, AttackStrategy::OddSlots, 0.05, 500_000, 3);
    let e = empirical_leakage(&cfg, 2).unwrap();
    assert!((0.45..=0.55).contains(&e.result.ratio), "{}", e.result.ratio);

    let cfg = SimConfig::new(Policy::Fcfs, AttackStrategy::PeriodicSampling { omega: 0.49 }, 0.5, 200_000, 3);
    let e = empirical_leakage(&cfg, 2).unwrap();
    assert!(e.exact_fraction.unwrap() > 0.8);
    assert!(e.result.bits_per_slot > 0.0 && e.result.ratio <= 1.0);

    let bad = SimConfig::new(Policy::Fcfs, AttackStrategy::OddSlots, 0.3, 1000, 3);
    assert!(matches!(empirical_leakage(&bad, 1), Err(LeakError::Unsupported(_))));
    let short = SimConfig::new(Policy::RoundRobin, AttackStrategy::NonstopMonitor, 0.3, 1000, 3);
    assert!(matches!(empirical_leakage(&short, 1), Err(LeakError::InsufficientSamples { .. })));
}
