mod oracles;

use oracles::{
    bernoulli_bits, clear_step_stream, ddm_levels, eddm_levels, exact_adwin_first_detection, first_drift,
    random_step_stream, ExactAdwin,
};
use proptest::prelude::*;
use streamfd::drift::{
    Adwin, AdwinParams, Ddm, DdmParams, DetectorKind, DetectorLevel, DetectorParams, Detector, DriftDetector, Eddm,
    EddmParams,
};

/// Levels emitted up to and including the first Drift.
fn run_levels(det: &mut impl DriftDetector, bits: &[u8]) -> Vec<DetectorLevel> {
    let mut out = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        let level = det.update(b, i as u64).unwrap();
        out.push(level);
        if level == DetectorLevel::Drift {
            break;
        }
    }
    out
}

/// Steps (1-based) at which Drift fires when the detector is reset after
/// each drift and keeps consuming the stream.
fn drift_steps_with_reset(det: &mut impl DriftDetector, bits: &[u8]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        if det.update(b, i as u64).unwrap() == DetectorLevel::Drift {
            out.push(i + 1);
            det.reset();
        }
    }
    out
}

/// Same, driven by a whole-stream level oracle restarted after each drift.
fn oracle_steps_with_reset(bits: &[u8], levels: impl Fn(&[u8]) -> Vec<DetectorLevel>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut start = 0;
    while let Some(t) = first_drift(&levels(&bits[start..])) {
        start += t;
        out.push(start);
    }
    out
}

fn truncate_at_drift(mut levels: Vec<DetectorLevel>) -> Vec<DetectorLevel> {
    if let Some(i) = first_drift(&levels) {
        levels.truncate(i);
    }
    levels
}

fn compare_adwin(bits: &[u8]) -> (Option<usize>, Option<usize>) {
    let expected = exact_adwin_first_detection(bits, 0.002);
    let got = first_drift(&run_levels(&mut Adwin::new(AdwinParams::default()), bits));
    (expected, got)
}

fn within_tolerance(pair: (Option<usize>, Option<usize>)) -> bool {
    match pair {
        (None, None) => true,
        (Some(e), Some(g)) => g.abs_diff(e) <= 32,
        _ => false,
    }
}

#[test]
fn adwin_matches_exact_oracle_on_step_streams() {
    let mut fired = 0;
    for seed in 0..100u64 {
        let pair = compare_adwin(&clear_step_stream(seed));
        fired += usize::from(pair.0.is_some());
        assert!(within_tolerance(pair), "seed {seed}: oracle {:?}, bucketed {:?}", pair.0, pair.1);
    }
    assert!(fired >= 40, "too few drifting streams to be informative: {fired}");
}

/// With arbitrary (possibly tiny) rate changes the statistic can hover at
/// the threshold, where boundary granularity shifts detection a lot; only
/// broad agreement is expected there.
#[test]
fn adwin_mostly_matches_oracle_on_arbitrary_streams() {
    let agree = (0..100u64)
        .filter(|&s| within_tolerance(compare_adwin(&random_step_stream(s))))
        .count();
    assert!(agree >= 90, "{agree} of 100");
}

#[test]
fn adwin_step_matches_oracle_and_keeps_post_change_window() {
    let bits: Vec<u8> = (0..1000).map(|i| u8::from(i >= 500)).collect();
    let mut oracle = ExactAdwin::new(0.002);
    let mut oracle_hits = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        if oracle.insert(f64::from(b)) {
            oracle_hits.push(i + 1);
        }
    }
    assert_eq!(oracle_hits.len(), 1);
    assert!(oracle.window.iter().all(|&v| v == 1.0));

    let mut a = Adwin::new(AdwinParams::default());
    let mut hits = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        if a.update(b, i as u64).unwrap() == DetectorLevel::Drift {
            hits.push(i + 1);
            assert_eq!(a.mean(), 1.0);
            a.reset();
        }
    }
    assert_eq!(hits.len(), 1);
    assert!((501..=600).contains(&hits[0]));
    assert!(hits[0].abs_diff(oracle_hits[0]) <= 32);
}

#[test]
fn ddm_matches_scalar_recurrence() {
    for seed in 0..100u64 {
        let bits = random_step_stream(seed);
        let expected = truncate_at_drift(ddm_levels(&bits, 30));
        let got = run_levels(&mut Ddm::new(DdmParams::default()), &bits);
        assert_eq!(got, expected, "seed {seed}");
    }
}

#[test]
fn eddm_matches_scalar_recurrence() {
    for seed in 0..100u64 {
        let bits = random_step_stream(seed);
        let expected = truncate_at_drift(eddm_levels(&bits, 0.95, 0.90, 30));
        let got = run_levels(&mut Eddm::new(EddmParams::default()), &bits);
        assert_eq!(got, expected, "seed {seed}");
    }
}

#[test]
fn reset_driven_runs_match_oracles() {
    for seed in 0..30u64 {
        let bits = random_step_stream(seed);
        assert_eq!(
            drift_steps_with_reset(&mut Ddm::new(DdmParams::default()), &bits),
            oracle_steps_with_reset(&bits, |b| ddm_levels(b, 30))
        );
        assert_eq!(
            drift_steps_with_reset(&mut Eddm::new(EddmParams::default()), &bits),
            oracle_steps_with_reset(&bits, |b| eddm_levels(b, 0.95, 0.90, 30))
        );
    }
}

/// A reset that lands just before the change restarts the warm-up, so a
/// small share of seeds may miss the 60-step budget.
#[test]
fn ddm_rate_jump_detected_quickly() {
    let mut quick = 0;
    for seed in 0..20u64 {
        let bits = bernoulli_bits(seed, 1000, |i| if i < 200 { 0.05 } else { 0.60 });
        let steps = oracle_steps_with_reset(&bits, |b| ddm_levels(b, 30));
        assert_eq!(drift_steps_with_reset(&mut Ddm::new(DdmParams::default()), &bits), steps);
        quick += usize::from(steps.iter().any(|&t| t > 200 && t <= 260));
    }
    assert!(quick >= 18, "{quick} of 20");
}

#[test]
fn adwin_false_alarm_rate_on_stationary_streams() {
    let alarms = (0..50u64)
        .filter(|&s| {
            let bits = bernoulli_bits(1000 + s, 5000, |_| 0.2);
            first_drift(&run_levels(&mut Adwin::new(AdwinParams::default()), &bits)).is_some()
        })
        .count();
    assert!(alarms <= 5, "{alarms} of 50");
}

#[test]
fn every_detector_catches_a_large_step() {
    for kind in [DetectorKind::Ddm, DetectorKind::Eddm, DetectorKind::Adwin] {
        let caught = (0..50u64)
            .filter(|&s| {
                let bits = bernoulli_bits(2000 + s, 3000, |i| if i < 1000 { 0.1 } else { 0.9 });
                let mut d = Detector::new(kind, &DetectorParams::default());
                drift_steps_with_reset(&mut d, &bits).iter().any(|&t| t > 1000 && t <= 1300)
            })
            .count();
        assert!(caught >= 48, "{kind}: {caught} of 50");
    }
}

proptest! {
    #[test]
    fn adwin_histogram_bookkeeping(bits in prop::collection::vec(0u8..=1, 1..1500)) {
        let mut a = Adwin::new(AdwinParams::default());
        for &b in &bits {
            a.insert(f64::from(b));
            prop_assert!(a.level_sizes().iter().all(|&n| n <= 5));
            prop_assert!((0.0..=1.0).contains(&a.mean()));
            prop_assert!(a.width() as usize <= bits.len());
        }
    }

    #[test]
    fn warm_up_emits_only_in_control(bits in prop::collection::vec(0u8..=1, 1..300)) {
        let ddm = ddm_levels(&bits, 30);
        prop_assert!(ddm.iter().take(29).all(|&l| l == DetectorLevel::InControl));
        let mut d = Ddm::new(DdmParams::default());
        let mut e = Eddm::new(EddmParams::default());
        let mut errors = 0;
        for (i, &b) in bits.iter().enumerate() {
            let ld = d.update(b, i as u64).unwrap();
            if i < 29 { prop_assert_eq!(ld, DetectorLevel::InControl); }
            errors += u64::from(b);
            let le = e.update(b, i as u64).unwrap();
            if errors < 30 { prop_assert_eq!(le, DetectorLevel::InControl); }
            if ld == DetectorLevel::Drift { d.reset(); }
            if le == DetectorLevel::Drift { e.reset(); errors = 0; }
        }
    }

    #[test]
    fn ddm_statistics_stay_in_range(bits in prop::collection::vec(0u8..=1, 1..500)) {
        let mut d = Ddm::new(DdmParams::default());
        for (i, &b) in bits.iter().enumerate() {
            if d.update(b, i as u64).unwrap() == DetectorLevel::Drift { d.reset(); continue; }
            prop_assert!((0.0..=1.0).contains(&d.error_rate()));
            prop_assert!(d.std_dev() >= 0.0);
        }
    }
}

