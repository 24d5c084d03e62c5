//! Synthetic revision histories and a brute-force oracle.
//!
//! [`ccs_fixture`] is a fixed 892-revision history of an artifact named
//! `CCS` whose aggregate figures are 192 passes, 700 failures, last failure
//! at 743, age 25 at revision 768 and three failure episodes.
//! [`generate`] produces seeded random histories with optional regression
//! injections; [`oracle`] recomputes every metric the slow way.

mod generate;
pub mod oracle;
pub mod prng;

pub use generate::{
    generate, generate_artifact, varied_config, Drift, GeneratorConfig, IndicatorConfig,
    Injection, InjectionKind, Level, SituationConfig, SynthError,
};

use crate::history::{ArtifactHistory, ArtifactId, HistorySet};

/// Outcome runs of the fixture: `(first, last, pass)`.
pub const FIXTURE_RUNS: [(usize, usize, bool); 6] = [
    (1, 100, false),
    (101, 121, true),
    (122, 300, false),
    (301, 322, true),
    (323, 743, false),
    (744, 892, true),
];

pub const FIXTURE_ARTIFACT: &str = "CCS";

pub fn ccs_fixture() -> ArtifactHistory {
    let res: Vec<u8> = FIXTURE_RUNS
        .iter()
        .flat_map(|&(first, last, pass)| std::iter::repeat_n(u8::from(pass), last - first + 1))
        .collect();
    ArtifactHistory::from_results(
        ArtifactId::new(FIXTURE_ARTIFACT).expect("valid id"),
        &res,
    )
    .expect("fixture runs are dense")
}

/// The fixture wrapped in a set.
pub fn ccs_fixture_set() -> HistorySet {
    let mut set = HistorySet::new();
    set.insert(ccs_fixture());
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    #[test]
    fn fixture_figures() {
        let h = ccs_fixture();
        assert_eq!(h.len(), 892);
        assert_eq!(metrics::r_succeeded(&h, 892), Ok(192));
        assert_eq!(metrics::r_failed(&h, 892), Ok(700));
        assert_eq!(metrics::last_failed(&h, 892), Ok(743));
        assert_eq!(metrics::neg_age(&h, 892), Ok(149));
        assert_eq!(metrics::neg_age(&h, 768), Ok(25));
        assert_eq!(metrics::r_failures(&h, 892), Ok(3));
        assert_eq!(metrics::q3_mtbtf(&h, 892), Ok(64.0));
    }
}
