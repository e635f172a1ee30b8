use proptest::prelude::*;

use ntsim_core::forwarder::{FaceId, FibEntry, NextHop};
use ntsim_core::strategy::{Choice, ChoiceKind, FailureKind, StrategyConfig, StrategyState, SwitchReason};
use ntsim_core::Name;

fn entry(n: u32) -> FibEntry {
    FibEntry {
        prefix: Name::from_uri("/t").unwrap(),
        nexthops: (0..n).map(|k| NextHop { face: FaceId(k), cost_ms: 10.0 + f64::from(k) }).collect(),
    }
}

fn forward(c: Choice) -> (FaceId, ChoiceKind) {
    match c {
        Choice::Forward { face, kind } => (face, kind),
        Choice::Exhausted => panic!("no candidate left"),
    }
}

/// Deterministic bounded jitter in `[-amp, amp]`.
fn jitter(k: u64, amp: f64) -> f64 {
    let x = (k.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40) as f64 / (1u64 << 24) as f64;
    (2.0 * x - 1.0) * amp
}

#[test]
fn probe_cadence_is_one_in_fifty() {
    let cfg = StrategyConfig::default();
    let e = entry(3);
    let mut s = StrategyState::new(&e);
    let rtts = [20.0, 35.0, 50.0];
    let mut probes = 0u64;
    for _ in 0..10_000 {
        let (face, kind) = forward(s.choose_face(&cfg, &e, &[]));
        if kind == ChoiceKind::Probe {
            probes += 1;
        }
        s.on_data(&cfg, face, rtts[face.0 as usize]);
    }
    assert!(probes.abs_diff(200) <= 1, "{probes} probes");
    assert_eq!(s.current_face, FaceId(0));
}

proptest! {
    #[test]
    fn probe_cadence_any_interval(interval in 2u32..200, n in 2u32..6, rounds in 1u64..60) {
        let cfg = StrategyConfig { probe_interval: interval, ..StrategyConfig::default() };
        let e = entry(n);
        let mut s = StrategyState::new(&e);
        let total = rounds * u64::from(interval);
        let mut probes = 0u64;
        for _ in 0..total {
            let (face, kind) = forward(s.choose_face(&cfg, &e, &[]));
            if kind == ChoiceKind::Probe {
                probes += 1;
                prop_assert_ne!(face, s.current_face);
            }
            // every face answers at the same delay, so nobody switches
            s.on_data(&cfg, face, 30.0);
        }
        prop_assert!(probes.abs_diff(rounds) <= 1);
    }

    #[test]
    fn lower_latency_switch_after_min_samples(
        min_samples in 1u32..12,
        slow in 40.0f64..200.0,
        fast in 5.0f64..35.0,
    ) {
        let cfg = StrategyConfig { min_samples, ..StrategyConfig::default() };
        let e = entry(2);
        let mut s = StrategyState::new(&e);
        let mut switched_at = None;
        for _ in 0..(u64::from(min_samples) + 2) * u64::from(cfg.probe_interval) {
            let (face, _) = forward(s.choose_face(&cfg, &e, &[]));
            let rtt = if face == FaceId(0) { slow } else { fast };
            let before = s.face_stats(FaceId(1)).map_or(0, |st| st.data_received);
            if let Some(d) = s.on_data(&cfg, face, rtt) {
                prop_assert_eq!(d.reason, SwitchReason::LowerLatency);
                prop_assert_eq!(d.to, FaceId(1));
                prop_assert!(switched_at.is_none(), "switched twice");
                switched_at = Some(before + 1);
            }
        }
        prop_assert_eq!(switched_at, Some(u64::from(min_samples)));
        prop_assert_eq!(s.current_face, FaceId(1));
    }

    #[test]
    fn failover_within_consecutive_failures(limit in 1u32..10, n in 2u32..5, warm in 0u64..200) {
        let cfg = StrategyConfig {
            max_consecutive_failures: limit,
            satisfaction_threshold: 0.01,
            ..StrategyConfig::default()
        };
        let e = entry(n);
        let mut s = StrategyState::new(&e);
        for _ in 0..warm {
            let (face, _) = forward(s.choose_face(&cfg, &e, &[]));
            s.on_data(&cfg, face, 20.0 + f64::from(face.0));
        }
        let failing = s.current_face;
        let mut failures = 0u32;
        let mut moved_after = None;
        while failures < limit {
            let (face, _) = forward(s.choose_face(&cfg, &e, &[]));
            if face != failing {
                continue;
            }
            failures += 1;
            if let Some(d) = s.on_failure(&cfg, &e, face, FailureKind::Timeout) {
                prop_assert_eq!(d.from, failing);
                moved_after = Some(failures);
                break;
            }
        }
        prop_assert!(s.current_face != failing, "still on {failing} after {limit} failures");
        prop_assert!(moved_after.is_some_and(|k| k <= limit));
    }

    #[test]
    fn argmax_stable_under_stationary_rtts(
        base in prop::collection::vec(10.0f64..300.0, 2..5),
        alpha in 0.05f64..=1.0,
    ) {
        // keep faces apart by more than twice the jitter
        let mut rtts = base.clone();
        rtts.sort_by(f64::total_cmp);
        for k in 1..rtts.len() {
            if rtts[k] - rtts[k - 1] < 6.0 {
                rtts[k] = rtts[k - 1] + 6.0;
            }
        }
        rtts.rotate_left(base.len() / 2);
        let best = FaceId(rtts.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 as u32);

        let cfg = StrategyConfig { ewma_alpha: alpha, ..StrategyConfig::default() };
        let e = entry(rtts.len() as u32);
        let mut s = StrategyState::new(&e);
        let mut settled = None;
        for k in 0..10_000u64 {
            let (face, _) = forward(s.choose_face(&cfg, &e, &[]));
            s.on_data(&cfg, face, rtts[face.0 as usize] + jitter(k, 2.0));
            match settled {
                None if s.current_face == best => settled = Some(k),
                Some(_) => prop_assert_eq!(s.current_face, best, "left the best face at {}", k),
                None => {}
            }
        }
        prop_assert!(settled.is_some(), "never settled on {best}");
    }
}
