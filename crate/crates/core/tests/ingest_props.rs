mod common;

use std::fs;

use common::{history_named, id};
use metametrics::history::{HistoryError, HistorySet, TestOutcome};
use metametrics::ingest::{self, load_history_files, load_history_set, IngestError, LoadOptions};
use metametrics::synth;
use proptest::prelude::*;

fn strict() -> LoadOptions {
    LoadOptions::default()
}

fn set_of(parts: Vec<metametrics::history::ArtifactHistory>) -> HistorySet {
    let mut set = HistorySet::new();
    for h in parts {
        set.insert(h);
    }
    set
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn write_then_load_is_identity(a in history_named("CCS", 40), b in history_named("ECU-7", 40)) {
        let set = set_of(vec![b, a]);
        let text = ingest::to_string(&set);
        let back = load_history_set(text.as_bytes(), &strict()).unwrap();
        prop_assert_eq!(&back, &set);
        prop_assert_eq!(ingest::to_string(&back), text);
    }

    #[test]
    fn output_ignores_insertion_order(a in history_named("A", 20), b in history_named("B", 20)) {
        let ab = set_of(vec![a.clone(), b.clone()]);
        let ba = set_of(vec![b, a]);
        prop_assert_eq!(ingest::to_string(&ab), ingest::to_string(&ba));
    }

    #[test]
    fn line_order_does_not_matter(a in history_named("A", 30), seed in any::<u64>()) {
        let set = set_of(vec![a]);
        let text = ingest::to_string(&set);
        let mut lines: Vec<&str> = text.lines().collect();
        let mut rng = synth::prng::SplitMix64::new(seed);
        for i in (1..lines.len()).rev() {
            lines.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let shuffled = lines.join("\n");
        prop_assert_eq!(load_history_set(shuffled.as_bytes(), &strict()).unwrap(), set);
    }

    #[test]
    fn renumbering_restores_dense_revisions(a in history_named("A", 30), stride in 1usize..50, offset in 0usize..1000) {
        let set = set_of(vec![a]);
        let text: String = ingest::to_string(&set)
            .lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                let r = v["revision"].as_u64().unwrap() as usize;
                v["revision"] = (offset + r * stride).into();
                format!("{v}\n")
            })
            .collect();
        let options = LoadOptions { renumber: true, ..strict() };
        prop_assert_eq!(load_history_set(text.as_bytes(), &options).unwrap(), set);
    }
}

#[test]
fn single_line_history() {
    let set = load_history_set(&br#"{"artifact":"CCS","revision":1,"result":"fail"}"#[..], &strict()).unwrap();
    let h = set.get(&id("CCS")).unwrap();
    assert_eq!(h.len(), 1);
    assert_eq!(h.outcomes().collect::<Vec<_>>(), [TestOutcome::Fail]);
}

#[test]
fn revision_zero_is_a_schema_violation() {
    let err = load_history_set(&br#"{"artifact":"CCS","revision":0,"result":"pass"}"#[..], &strict()).unwrap_err();
    match err {
        IngestError::Schema { line, field, .. } => {
            assert_eq!(line, 1);
            assert_eq!(field, "revision");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn empty_input() {
    let err = load_history_set(&b"\n\n"[..], &strict()).unwrap_err();
    assert!(matches!(err, IngestError::History { source: HistoryError::EmptyInput, .. }));
}

#[test]
fn bare_records_have_three_keys() {
    let set = load_history_set(&br#"{"result":"pass","revision":1,"artifact":"A"}"#[..], &strict()).unwrap();
    assert_eq!(ingest::to_string(&set), "{\"artifact\":\"A\",\"revision\":1,\"result\":\"pass\"}\n");
}

#[test]
fn acting_keys_are_sorted() {
    let line = r#"{"artifact":"A","revision":1,"result":"pass","acting_s":{"zebra":1.5,"cutin":0.25}}"#;
    let set = load_history_set(line.as_bytes(), &strict()).unwrap();
    assert_eq!(
        ingest::to_string(&set),
        "{\"artifact\":\"A\",\"revision\":1,\"result\":\"pass\",\"acting_s\":{\"cutin\":0.25,\"zebra\":1.5}}\n"
    );
}

#[test]
fn fixture_round_trips_byte_for_byte() {
    let set = synth::ccs_fixture_set();
    let first = ingest::to_string(&set);
    let mut second = Vec::new();
    ingest::write_history_set(&set, &mut second).unwrap();
    assert_eq!(first.as_bytes(), &second[..]);
    assert_eq!(load_history_set(first.as_bytes(), &strict()).unwrap(), set);
    assert_eq!(first.lines().count(), 892);
}

#[test]
fn generated_measurements_round_trip() {
    for seed in 0..40 {
        let set = synth::generate(&synth::varied_config(seed)).unwrap();
        let text = ingest::to_string(&set);
        assert_eq!(load_history_set(text.as_bytes(), &strict()).unwrap(), set, "seed {seed}");
    }
}

#[test]
fn files_pool_records() {
    let dir = tempfile::tempdir().unwrap();
    let set = synth::generate(&synth::varied_config(7)).unwrap();
    let text = ingest::to_string(&set);
    let (odd, even): (Vec<_>, Vec<_>) = text.lines().enumerate().partition(|(i, _)| i % 2 == 1);
    let join = |part: Vec<(usize, &str)>| part.into_iter().map(|(_, l)| format!("{l}\n")).collect::<String>();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    fs::write(&a, join(odd)).unwrap();
    fs::write(&b, join(even)).unwrap();
    assert_eq!(load_history_files(&[&a, &b], &strict()).unwrap(), set);
}

#[test]
fn overlapping_files_name_the_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    fs::write(&a, "{\"artifact\":\"A\",\"revision\":1,\"result\":\"pass\"}\n").unwrap();
    fs::write(&b, "\n{\"artifact\":\"A\",\"revision\":1,\"result\":\"fail\"}\n").unwrap();
    let err = load_history_files(&[&a, &b], &strict()).unwrap_err();
    let text = err.to_string();
    assert!(text.contains("b.jsonl") && text.contains("line 2"), "{text}");
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_history_files(&[dir.path().join("absent.jsonl")], &strict()).unwrap_err();
    assert!(matches!(err.errors()[0], IngestError::Io(_)));
}

#[test]
fn unknown_keys_need_lenient_mode() {
    let line = r#"{"artifact":"A","revision":1,"result":"pass","branch":"main"}"#;
    assert!(load_history_set(line.as_bytes(), &strict()).is_err());
    let lenient = LoadOptions { lenient: true, ..strict() };
    assert_eq!(load_history_set(line.as_bytes(), &lenient).unwrap().record_count(), 1);
}
