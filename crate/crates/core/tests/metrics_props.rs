mod common;

use approx::assert_abs_diff_eq;
use common::{history, history_and_pair, history_and_triple, id};
use metametrics::history::{ArtifactHistory, IndicatorSample, RevisionRecord, TestOutcome};
use metametrics::metrics::{self, verdict, SpreadMode, Indicator, MetricsError, PairMetric, Verdict};
use metametrics::synth::oracle;
use proptest::prelude::*;

const SITUATIONS: [&str; 3] = ["cutin", "pedestrian", "ghost"];
const MODES: [SpreadMode; 2] = [SpreadMode::PassesOnly, SpreadMode::Strict];

fn agree(engine: Result<f64, MetricsError>, oracle: Result<f64, MetricsError>) -> Result<(), TestCaseError> {
    match (engine, oracle) {
        (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9, "engine {} oracle {}", a, b),
        (a, b) => prop_assert_eq!(a, b),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn engine_matches_oracle((h, n1, n2) in history_and_pair(60), swap in any::<bool>()) {
        let (n1, n2) = if swap { (n2, n1) } else { (n1, n2) };
        for n in [n1, n2] {
            prop_assert_eq!(metrics::r_succeeded(&h, n), oracle::oracle_r_succeeded(&h, n));
            prop_assert_eq!(metrics::r_failed(&h, n), oracle::oracle_r_failed(&h, n));
            prop_assert_eq!(metrics::last_failed(&h, n), oracle::oracle_last_failed(&h, n));
            prop_assert_eq!(metrics::neg_age(&h, n), oracle::oracle_neg_age(&h, n));
            prop_assert_eq!(metrics::r_failures(&h, n), oracle::oracle_r_failures(&h, n));
            agree(metrics::q3_mtbtf(&h, n), oracle::oracle_q3(&h, n))?;
        }
        agree(metrics::q1(&h, n1, n2), oracle::oracle_q1(&h, n1, n2))?;
        prop_assert_eq!(metrics::q2(&h, n1, n2), oracle::oracle_q2(&h, n1, n2));
        for ind in Indicator::ALL {
            agree(metrics::q4(&h, n1, n2, ind), oracle::oracle_q4(&h, n1, n2, ind))?;
        }
        agree(metrics::q5(&h, n1, n2), oracle::oracle_q5(&h, n1, n2))?;
        for s in SITUATIONS {
            for mode in MODES {
                agree(metrics::q6(&h, n1, n2, s, mode), oracle::oracle_q6(&h, n1, n2, s, mode))?;
            }
        }
    }

    #[test]
    fn out_of_range_gates_agree(h in history(20), over in 1usize..5) {
        let n = h.len();
        prop_assert_eq!(metrics::q1(&h, 1, n + over), Err(MetricsError::OutOfRange { n: n + over, len: n }));
        prop_assert_eq!(metrics::q1(&h, 0, n), oracle::oracle_q1(&h, 0, n));
        prop_assert_eq!(metrics::q5(&h, n + over, n + over), oracle::oracle_q5(&h, n + over, n + over));
        prop_assert_eq!(metrics::r_succeeded(&h, 0), Err(MetricsError::OutOfRange { n: 0, len: n }));
    }

    #[test]
    fn counting_identities(h in history(60)) {
        let mut prev = (0, 0);
        for n in 1..=h.len() {
            let (plus, minus) = metrics::success_ratio(&h, n).unwrap();
            assert_abs_diff_eq!(plus + minus, 1.0, epsilon = 1e-12);
            let succeeded = metrics::r_succeeded(&h, n).unwrap();
            prop_assert_eq!(succeeded + metrics::r_failed(&h, n).unwrap(), n);
            let last = metrics::last_failed(&h, n).unwrap();
            prop_assert_eq!(last + metrics::neg_age(&h, n).unwrap(), n);
            let episodes = metrics::r_failures(&h, n).unwrap();
            prop_assert!(episodes <= succeeded && episodes <= n - succeeded);
            prop_assert!(last >= prev.0 && episodes >= prev.1);
            prev = (last, episodes);
            prop_assert_eq!(metrics::q3_mtbtf(&h, n).is_ok(), episodes > 0);
        }
    }

    #[test]
    fn gate_triples_telescope((h, a, b, c) in history_and_triple(60)) {
        fn check(f: impl Fn(usize, usize) -> Result<f64, MetricsError>, a: usize, b: usize, c: usize) -> Result<(), TestCaseError> {
            if let (Ok(ab), Ok(bc), Ok(ac)) = (f(a, b), f(b, c), f(a, c)) {
                prop_assert!((ab + bc - ac).abs() <= 1e-12, "{} + {} != {}", ab, bc, ac);
            }
            Ok(())
        }
        check(|x, y| metrics::q1(&h, x, y), a, b, c)?;
        if a < b && b < c {
            let q2 = |x, y| metrics::q2(&h, x, y).unwrap();
            prop_assert_eq!(q2(a, b) + q2(b, c), q2(a, c));
        }
        for ind in Indicator::ALL {
            check(|x, y| metrics::q4(&h, x, y, ind), a, b, c)?;
        }
        check(|x, y| metrics::q5(&h, x, y), a, b, c)?;
        for s in SITUATIONS {
            for mode in MODES {
                check(|x, y| metrics::q6(&h, x, y, s, mode), a, b, c)?;
            }
        }
    }

    #[test]
    fn same_gate_is_zero(h in history(40)) {
        for n in 1..=h.len() {
            prop_assert_eq!(metrics::q1(&h, n, n), Ok(0.0));
            prop_assert_eq!(metrics::q2(&h, n, n), Err(MetricsError::InvalidGateOrder { n1: n, n2: n }));
            for ind in Indicator::ALL {
                if let Ok(v) = metrics::q4(&h, n, n, ind) {
                    prop_assert_eq!(v, 0.0);
                }
            }
            if let Ok(v) = metrics::q5(&h, n, n) {
                prop_assert_eq!(v, 0.0);
            }
            for s in SITUATIONS {
                for mode in MODES {
                    if let Ok(v) = metrics::q6(&h, n, n, s, mode) {
                        prop_assert_eq!(v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn spread_is_non_negative_and_strict_is_wider(h in history(40)) {
        for n in 1..=h.len() {
            for s in SITUATIONS {
                let loose = metrics::acting_stddev(&h, n, s, SpreadMode::PassesOnly);
                let strict = metrics::acting_stddev(&h, n, s, SpreadMode::Strict);
                match (loose, strict) {
                    (Ok(l), Ok(t)) => {
                        prop_assert!(l.v >= 0.0);
                        prop_assert!(t.v >= l.v - 1e-12);
                        prop_assert_eq!(l.mean, t.mean);
                    }
                    (l, t) => prop_assert_eq!(l, t),
                }
            }
        }
    }

    #[test]
    fn verdict_follows_sign(v in -1e6f64..1e6) {
        for m in [PairMetric::Q1, PairMetric::Q2, PairMetric::Q6] {
            prop_assert_eq!(verdict(m, v), if v >= 0.0 { Verdict::NotDecreased } else { Verdict::Decreased });
        }
        for m in [PairMetric::Q4, PairMetric::Q5] {
            prop_assert_eq!(verdict(m, v), if v >= 0.0 { Verdict::Improved } else { Verdict::Decreased });
        }
    }
}

fn results(res: &[u8]) -> ArtifactHistory {
    ArtifactHistory::from_results(id("A"), res).unwrap()
}

#[test]
fn worked_example() {
    let h = results(&[0, 1, 1, 0, 1]);
    assert_eq!(metrics::r_succeeded(&h, 5), Ok(3));
    assert_eq!(metrics::success_ratio(&h, 5), Ok((0.6, 0.4)));
    assert_eq!(metrics::last_failed(&h, 5), Ok(4));
    assert_eq!(metrics::neg_age(&h, 3), Ok(2));
    assert_eq!(metrics::q2(&h, 3, 5), Ok(-1));
    assert_eq!(metrics::r_failures(&h, 5), Ok(2));
    assert_eq!(metrics::q3_mtbtf(&h, 5), Ok(1.5));
    assert_abs_diff_eq!(metrics::q1(&h, 3, 5).unwrap(), 0.6 - 2.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn trailing_failures_are_not_an_episode() {
    let h = results(&[1, 1, 0, 0]);
    assert_eq!(metrics::r_failures(&h, 4), Ok(0));
    assert_eq!(metrics::q3_mtbtf(&h, 4), Err(MetricsError::UndefinedMtbtf));
    assert_eq!(metrics::neg_age(&h, 4), Ok(0));
}

fn timed(outcomes: &[(bool, f64, f64)]) -> ArtifactHistory {
    let records = outcomes
        .iter()
        .enumerate()
        .map(|(i, &(pass, duration, acting))| {
            let mut sample = IndicatorSample::default();
            if pass {
                sample.duration = Some(duration);
                sample.acting.insert("cutin".into(), acting);
            }
            let outcome = if pass { TestOutcome::Pass } else { TestOutcome::Fail };
            RevisionRecord::new(id("A"), i + 1, outcome).with_indicators(sample)
        })
        .collect();
    ArtifactHistory::new(id("A"), records).unwrap()
}

#[test]
fn timing_metrics_by_hand() {
    // passes at 1, 3, 4 with durations 2, 4, 9 and acting 1, 3, 2
    let h = timed(&[(true, 2.0, 1.0), (false, 0.0, 0.0), (true, 4.0, 3.0), (true, 9.0, 2.0)]);
    assert_eq!(metrics::q5(&h, 1, 4), Ok(2.0 - 5.0));
    let spread = metrics::acting_stddev(&h, 4, "cutin", SpreadMode::PassesOnly).unwrap();
    assert_abs_diff_eq!(spread.mean, 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(spread.v, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    // one failing revision adds mean^2 = 4 to the squared deviations: (2 + 4) / 3
    let strict = metrics::acting_stddev(&h, 4, "cutin", SpreadMode::Strict).unwrap();
    assert_abs_diff_eq!(strict.v, 2.0f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(
        metrics::q6(&h, 3, 4, "cutin", SpreadMode::PassesOnly).unwrap(),
        1.0 - (2.0f64 / 3.0).sqrt(),
        epsilon = 1e-15
    );
}

#[test]
fn timing_needs_an_early_pass() {
    let h = timed(&[(false, 0.0, 0.0), (true, 3.0, 1.0)]);
    assert_eq!(metrics::q5(&h, 1, 2), Err(MetricsError::NoSuccessfulRevisions { n: 1 }));
    assert_eq!(
        metrics::q6(&h, 1, 2, "cutin", SpreadMode::PassesOnly),
        Err(MetricsError::NoSuccessfulRevisions { n: 1 })
    );
    assert_eq!(
        metrics::q6(&h, 2, 2, "brake", SpreadMode::PassesOnly),
        Err(MetricsError::MissingSituation { situation: "brake".into(), revisions: vec![2] })
    );
}

#[test]
fn missing_indicators_are_listed() {
    let h = results(&[1, 1]);
    let err = metrics::q4(&h, 1, 2, Indicator::Mccabe).unwrap_err();
    assert_eq!(
        err,
        MetricsError::MissingIndicator { indicator: "mccabe".into(), revisions: vec![1, 2] }
    );
    assert_eq!(err.to_string(), "mccabe missing at revisions 1-2");
}
