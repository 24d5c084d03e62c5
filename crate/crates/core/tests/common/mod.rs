#![allow(dead_code)]

use std::collections::BTreeMap;

use metametrics::history::{ArtifactHistory, ArtifactId, IndicatorSample, RevisionRecord, TestOutcome};
use proptest::prelude::*;

pub fn id(s: &str) -> ArtifactId {
    ArtifactId::new(s).unwrap()
}

/// Measurements where each value is present with high probability.
pub fn sample(present: f64) -> impl Strategy<Value = IndicatorSample> {
    (
        maybe(present, 1u64..5000),
        maybe(present, 0u64..100),
        maybe(present, 1u64..60),
        maybe(present, 0u64..400),
        maybe(present, 0.0f64..120.0),
        maybe(present, 0.0f64..5.0),
        maybe(present, 0.0f64..5.0),
    )
        .prop_map(|(sloc, misra, mccabe, uncovered, duration, cutin, ped)| {
            let mut acting = BTreeMap::new();
            if let Some(t) = cutin {
                acting.insert("cutin".to_string(), t);
            }
            if let Some(t) = ped {
                acting.insert("pedestrian".to_string(), t);
            }
            IndicatorSample {
                sloc,
                misra_warnings: misra,
                mccabe,
                uncovered,
                duration,
                acting,
            }
        })
}

/// `Some` with probability `p`; unlike `prop::option::weighted`, `p` may be 0 or 1.
pub fn maybe<S: Strategy>(p: f64, inner: S) -> impl Strategy<Value = Option<S::Value>> {
    (0.0f64..1.0, inner).prop_map(move |(u, v)| (u < p).then_some(v))
}

pub fn outcome(pass_rate: f64) -> impl Strategy<Value = TestOutcome> {
    (0.0f64..1.0).prop_map(move |u| if u < pass_rate { TestOutcome::Pass } else { TestOutcome::Fail })
}

/// A history named `name` of 1..=max_len revisions. The pass rate varies
/// per history so all-pass and all-fail runs show up.
pub fn history_named(name: &'static str, max_len: usize) -> impl Strategy<Value = ArtifactHistory> {
    (0u32..=8, prop_oneof![Just(1.0), Just(0.9)]).prop_flat_map(move |(w, present)| {
        prop::collection::vec((outcome(f64::from(w) / 8.0), sample(present)), 1..=max_len).prop_map(move |revs| {
            let records = revs
                .into_iter()
                .enumerate()
                .map(|(i, (o, s))| RevisionRecord::new(id(name), i + 1, o).with_indicators(s))
                .collect();
            ArtifactHistory::new(id(name), records).unwrap()
        })
    })
}

pub fn history(max_len: usize) -> impl Strategy<Value = ArtifactHistory> {
    history_named("A", max_len)
}

/// A history with one valid gate pair `n1 <= n2`.
pub fn history_and_pair(max_len: usize) -> impl Strategy<Value = (ArtifactHistory, usize, usize)> {
    history(max_len).prop_flat_map(|h| {
        let n = h.len();
        (Just(h), 1..=n).prop_flat_map(move |(h, n1)| (Just(h), Just(n1), n1..=n))
    })
}

/// A history with gates `a <= b <= c`.
pub fn history_and_triple(
    max_len: usize,
) -> impl Strategy<Value = (ArtifactHistory, usize, usize, usize)> {
    history(max_len).prop_flat_map(|h| {
        let n = h.len();
        (Just(h), prop::collection::vec(1..=n, 3)).prop_map(|(h, mut g)| {
            g.sort_unstable();
            (h, g[0], g[1], g[2])
        })
    })
}
