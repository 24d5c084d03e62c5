mod common;

use common::{history, id};
use metametrics::history::{build_history, ArtifactHistory, HistoryError, HistorySet, RevisionRecord, TestOutcome};
use metametrics::metrics;
use proptest::prelude::*;

fn shuffled(h: &ArtifactHistory) -> impl Strategy<Value = Vec<RevisionRecord>> {
    Just(h.records().to_vec()).prop_shuffle()
}

proptest! {
    #[test]
    fn record_order_does_not_matter((h, records) in history(40).prop_flat_map(|h| {
        let r = shuffled(&h);
        (Just(h), r)
    })) {
        let rebuilt = ArtifactHistory::new(h.artifact().clone(), records).unwrap();
        prop_assert_eq!(rebuilt, h);
    }

    #[test]
    fn errors_do_not_depend_on_order(
        (records, shuffled) in history(30)
            .prop_filter("needs a middle record", |h| h.len() >= 3)
            .prop_flat_map(|h| {
                let n = h.len();
                (Just(h), 1..n - 1, any::<bool>())
            })
            .prop_flat_map(|(h, k, duplicate)| {
                let mut records = h.records().to_vec();
                if duplicate {
                    let copy = records[k].clone();
                    records.push(copy);
                } else {
                    records.remove(k);
                }
                (Just(records.clone()), Just(records).prop_shuffle())
            })
    ) {
        let a = ArtifactHistory::new(id("A"), records).unwrap_err();
        let b = ArtifactHistory::new(id("A"), shuffled).unwrap_err();
        let expected = matches!(a, HistoryError::DuplicateRevision { .. } | HistoryError::GapInHistory { .. });
        prop_assert!(expected, "unexpected error {:?}", a);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn prefixes_are_leading_records((h, n) in history(40).prop_flat_map(|h| {
        let len = h.len();
        (Just(h), 1..=len)
    })) {
        let p = h.prefix(n).unwrap();
        prop_assert_eq!(p.len(), n);
        prop_assert_eq!(p.records(), &h.records()[..n]);
        prop_assert_eq!(p.artifact(), h.artifact());
        for m in 1..=n {
            prop_assert_eq!(p.prefix(m).unwrap(), h.prefix(m).unwrap());
        }
        prop_assert_eq!(h.prefix(h.len()).unwrap(), h.clone());
    }

    #[test]
    fn metrics_only_see_the_prefix((h, n) in history(40).prop_flat_map(|h| {
        let len = h.len();
        (Just(h), 1..=len)
    })) {
        let p = h.prefix(n).unwrap();
        prop_assert_eq!(metrics::r_succeeded(&p, n), metrics::r_succeeded(&h, n));
        prop_assert_eq!(metrics::last_failed(&p, n), metrics::last_failed(&h, n));
        prop_assert_eq!(metrics::r_failures(&p, n), metrics::r_failures(&h, n));
        prop_assert_eq!(metrics::q5(&p, 1, n), metrics::q5(&h, 1, n));
    }

    #[test]
    fn prefix_bounds(h in history(20)) {
        let len = h.len();
        prop_assert_eq!(h.prefix(0), Err(HistoryError::OutOfRange { n: 0, len }));
        prop_assert_eq!(h.prefix(len + 1), Err(HistoryError::OutOfRange { n: len + 1, len }));
    }

    #[test]
    fn grouping_splits_artifacts(a in common::history_named("A", 20), b in common::history_named("B", 20)) {
        let mut records = a.records().to_vec();
        records.extend(b.records().iter().cloned());
        records.reverse();
        let set = build_history(records).unwrap();
        prop_assert_eq!(set.len(), 2);
        prop_assert_eq!(set.get(&id("A")), Some(&a));
        prop_assert_eq!(set.get(&id("B")), Some(&b));
        prop_assert_eq!(set.record_count(), a.len() + b.len());
    }

    #[test]
    fn set_json_round_trip(a in common::history_named("A", 15), b in common::history_named("B", 15)) {
        let mut set = HistorySet::new();
        set.insert(a);
        set.insert(b);
        let text = serde_json::to_string(&set).unwrap();
        let back: HistorySet = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, set);
    }
}

#[test]
fn deserializing_checks_density() {
    let text = r#"{"A":{"artifact":"A","records":[
        {"artifact":"A","revision":2,"outcome":"pass","indicators":{"sloc":null,"misra_warnings":null,"mccabe":null,"uncovered":null,"duration":null,"acting":{}}}
    ]}}"#;
    assert!(serde_json::from_str::<HistorySet>(text).is_err());
}

#[test]
fn results_constructor_matches_records() {
    let h = ArtifactHistory::from_results(id("A"), &[0, 1, 1]).unwrap();
    let outcomes: Vec<_> = h.outcomes().collect();
    assert_eq!(outcomes, [TestOutcome::Fail, TestOutcome::Pass, TestOutcome::Pass]);
    assert_eq!(h.record(2).unwrap().revision, 2);
    assert!(h.record(0).is_none());
}
