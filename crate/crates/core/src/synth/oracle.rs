//! Brute-force reference implementations of every metric.
//!
//! Each function writes out the defining sums term by term over
//! `i = 1..=N`, with `res(i)`, `duration(i)` and `acting(i, s)` taken as 0
//! on failing revisions, and recomputes every intermediate quantity from
//! scratch. Nothing here calls into [`crate::metrics`]; the two share only
//! the error type so their failures can be compared.

use crate::history::{ArtifactHistory, TestOutcome};
use crate::metrics::{ActingSpread, SpreadMode, Indicator, MetricsError};

fn res(h: &ArtifactHistory, i: usize) -> u64 {
    match h.record(i).expect("index checked").outcome {
        TestOutcome::Pass => 1,
        TestOutcome::Fail => 0,
    }
}

fn in_range(h: &ArtifactHistory, n: usize) -> Result<(), MetricsError> {
    if (1..=h.len()).contains(&n) {
        Ok(())
    } else {
        Err(MetricsError::OutOfRange { n, len: h.len() })
    }
}

fn gate_pair(h: &ArtifactHistory, n1: usize, n2: usize, strictly: bool) -> Result<(), MetricsError> {
    in_range(h, n1)?;
    in_range(h, n2)?;
    let ordered = if strictly { n1 < n2 } else { n1 <= n2 };
    if ordered {
        Ok(())
    } else {
        Err(MetricsError::InvalidGateOrder { n1, n2 })
    }
}

pub fn oracle_r_succeeded(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    in_range(h, n)?;
    let mut sum = 0u64;
    for i in 1..=n {
        sum += res(h, i);
    }
    Ok(sum as usize)
}

pub fn oracle_r_failed(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    in_range(h, n)?;
    let mut fails = 0;
    for i in 1..=n {
        if res(h, i) == 0 {
            fails += 1;
        }
    }
    Ok(fails)
}

pub fn oracle_success_ratio(h: &ArtifactHistory, n: usize) -> Result<(f64, f64), MetricsError> {
    let plus = oracle_r_succeeded(h, n)? as f64 / n as f64;
    Ok((plus, 1.0 - plus))
}

pub fn oracle_q1(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<f64, MetricsError> {
    gate_pair(h, n1, n2, false)?;
    Ok(oracle_success_ratio(h, n2)?.0 - oracle_success_ratio(h, n1)?.0)
}

pub fn oracle_last_failed(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    in_range(h, n)?;
    let mut last = 0;
    for i in 1..=n {
        if res(h, i) == 0 {
            last = i;
        }
    }
    Ok(last)
}

pub fn oracle_neg_age(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    Ok(n - oracle_last_failed(h, n)?)
}

pub fn oracle_q2(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<i64, MetricsError> {
    gate_pair(h, n1, n2, true)?;
    Ok(oracle_neg_age(h, n2)? as i64 - oracle_neg_age(h, n1)? as i64)
}

pub fn oracle_r_failures(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    in_range(h, n)?;
    let mut count = 0;
    for i in 1..n {
        let fail = res(h, i) != res(h, i + 1) && res(h, i) == 0;
        if fail {
            count += 1;
        }
    }
    Ok(count)
}

pub fn oracle_q3(h: &ArtifactHistory, n: usize) -> Result<f64, MetricsError> {
    let succeeded = oracle_r_succeeded(h, n)?;
    let failures = oracle_r_failures(h, n)?;
    if failures == 0 {
        return Err(MetricsError::UndefinedMtbtf);
    }
    Ok(succeeded as f64 / failures as f64)
}

fn mean_normalized(h: &ArtifactHistory, n: usize, indicator: Indicator) -> f64 {
    let mut sum = 0.0;
    for i in 1..=n {
        let s = &h.record(i).expect("index checked").indicators;
        let f = match indicator {
            Indicator::MisraWarnings => s.misra_warnings,
            Indicator::Mccabe => s.mccabe,
            Indicator::Uncovered => s.uncovered,
        };
        sum += f.expect("presence checked") as f64 / s.sloc.expect("presence checked") as f64;
    }
    sum / n as f64
}

pub fn oracle_q4(
    h: &ArtifactHistory,
    n1: usize,
    n2: usize,
    indicator: Indicator,
) -> Result<f64, MetricsError> {
    gate_pair(h, n1, n2, false)?;
    let mut lacking_f = Vec::new();
    let mut lacking_sloc = Vec::new();
    for i in 1..=n2 {
        let s = &h.record(i).expect("index checked").indicators;
        let f = match indicator {
            Indicator::MisraWarnings => s.misra_warnings,
            Indicator::Mccabe => s.mccabe,
            Indicator::Uncovered => s.uncovered,
        };
        if f.is_none() {
            lacking_f.push(i);
        }
        if s.sloc.is_none() {
            lacking_sloc.push(i);
        }
    }
    if !lacking_f.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: indicator.as_str().to_string(),
            revisions: lacking_f,
        });
    }
    if !lacking_sloc.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: "sloc".to_string(),
            revisions: lacking_sloc,
        });
    }
    Ok(mean_normalized(h, n1, indicator) - mean_normalized(h, n2, indicator))
}

fn duration(h: &ArtifactHistory, i: usize) -> f64 {
    if res(h, i) == 1 {
        h.record(i).unwrap().indicators.duration.expect("presence checked")
    } else {
        0.0
    }
}

pub fn oracle_q5(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<f64, MetricsError> {
    gate_pair(h, n1, n2, false)?;
    if oracle_r_succeeded(h, n1)? == 0 {
        return Err(MetricsError::NoSuccessfulRevisions { n: n1 });
    }
    let mut lacking = Vec::new();
    for i in 1..=n2 {
        if res(h, i) == 1 && h.record(i).unwrap().indicators.duration.is_none() {
            lacking.push(i);
        }
    }
    if !lacking.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: "duration".to_string(),
            revisions: lacking,
        });
    }
    let average = |n: usize| -> Result<f64, MetricsError> {
        let mut sum = 0.0;
        for i in 1..=n {
            sum += duration(h, i);
        }
        Ok(sum / oracle_r_succeeded(h, n)? as f64)
    };
    Ok(average(n1)? - average(n2)?)
}

fn acting(h: &ArtifactHistory, i: usize, situation: &str) -> f64 {
    if res(h, i) == 1 {
        h.record(i).unwrap().indicators.acting[situation]
    } else {
        0.0
    }
}

fn lacking_situation(h: &ArtifactHistory, n: usize, situation: &str) -> Result<(), MetricsError> {
    let mut lacking = Vec::new();
    for i in 1..=n {
        if res(h, i) == 1 && !h.record(i).unwrap().indicators.acting.contains_key(situation) {
            lacking.push(i);
        }
    }
    if lacking.is_empty() {
        Ok(())
    } else {
        Err(MetricsError::MissingSituation {
            situation: situation.to_string(),
            revisions: lacking,
        })
    }
}

fn two_pass_spread(h: &ArtifactHistory, n: usize, situation: &str, mode: SpreadMode) -> ActingSpread {
    let succeeded = oracle_r_succeeded(h, n).expect("range checked") as f64;
    let mut sum = 0.0;
    for i in 1..=n {
        sum += acting(h, i, situation);
    }
    let mean = sum / succeeded;
    let mut squares = 0.0;
    for i in 1..=n {
        let counted = match mode {
            SpreadMode::Strict => true,
            SpreadMode::PassesOnly => res(h, i) == 1,
        };
        if counted {
            let d = acting(h, i, situation) - mean;
            squares += d * d;
        }
    }
    ActingSpread {
        mean,
        v: (squares / succeeded).sqrt(),
    }
}

pub fn oracle_acting_stddev(
    h: &ArtifactHistory,
    n: usize,
    situation: &str,
    mode: SpreadMode,
) -> Result<ActingSpread, MetricsError> {
    if oracle_r_succeeded(h, n)? == 0 {
        return Err(MetricsError::NoSuccessfulRevisions { n });
    }
    lacking_situation(h, n, situation)?;
    Ok(two_pass_spread(h, n, situation, mode))
}

pub fn oracle_q6(
    h: &ArtifactHistory,
    n1: usize,
    n2: usize,
    situation: &str,
    mode: SpreadMode,
) -> Result<f64, MetricsError> {
    gate_pair(h, n1, n2, false)?;
    if oracle_r_succeeded(h, n1)? == 0 {
        return Err(MetricsError::NoSuccessfulRevisions { n: n1 });
    }
    lacking_situation(h, n2, situation)?;
    Ok(two_pass_spread(h, n1, situation, mode).v - two_pass_spread(h, n2, situation, mode).v)
}
