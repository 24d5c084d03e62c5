use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{Indicator, MetricsError, MetricsReport};

/// Names one figure of a report, e.g. `r_plus`, `q2`, `q4:mccabe` or
/// `q6:cutin`. `mtbtf` is accepted for `q3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricSelector {
    RSucceeded,
    RFailed,
    RPlus,
    RMinus,
    LastFailed,
    NegAge,
    RFailures,
    Q1,
    Q2,
    Q3,
    Q4(Indicator),
    Q5,
    Q6(String),
}

impl MetricSelector {
    /// Q-metrics; the only selectors gate rules accept.
    pub fn is_q_metric(&self) -> bool {
        matches!(
            self,
            MetricSelector::Q1
                | MetricSelector::Q2
                | MetricSelector::Q3
                | MetricSelector::Q4(_)
                | MetricSelector::Q5
                | MetricSelector::Q6(_)
        )
    }

    /// Value for the gate pair `(n1, n2)`; single-gate figures are read at
    /// `n2`. `None` when the report does not contain the gate, the pair, or
    /// the requested indicator or situation.
    pub fn lookup(
        &self,
        report: &MetricsReport,
        n1: usize,
        n2: usize,
    ) -> Option<Result<f64, MetricsError>> {
        use MetricSelector::*;
        let at = || report.figures_at(n2);
        let slot = |s: &crate::metrics::MetricSlot| match s {
            crate::metrics::MetricSlot::Defined { value, .. } => Ok(*value),
            crate::metrics::MetricSlot::Undefined { reason } => Err(reason.clone()),
        };
        match self {
            RSucceeded => at().map(|g| Ok(g.r_succeeded as f64)),
            RFailed => at().map(|g| Ok(g.r_failed as f64)),
            RPlus => at().map(|g| Ok(g.r_plus)),
            RMinus => at().map(|g| Ok(g.r_minus)),
            LastFailed => at().map(|g| Ok(g.last_failed as f64)),
            NegAge => at().map(|g| Ok(g.neg_age as f64)),
            RFailures => at().map(|g| Ok(g.r_failures as f64)),
            Q3 => at().map(|g| g.mtbtf.ok_or(MetricsError::UndefinedMtbtf)),
            Q1 => report.pair(n1, n2).map(|p| slot(&p.q1)),
            Q2 => report.pair(n1, n2).map(|p| slot(&p.q2)),
            Q5 => report.pair(n1, n2).map(|p| slot(&p.q5)),
            Q4(ind) => report.pair(n1, n2).and_then(|p| p.q4.get(ind)).map(slot),
            Q6(s) => report.pair(n1, n2).and_then(|p| p.q6.get(s)).map(slot),
        }
    }
}

impl fmt::Display for MetricSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MetricSelector::*;
        match self {
            RSucceeded => f.write_str("r_succeeded"),
            RFailed => f.write_str("r_failed"),
            RPlus => f.write_str("r_plus"),
            RMinus => f.write_str("r_minus"),
            LastFailed => f.write_str("last_failed"),
            NegAge => f.write_str("neg_age"),
            RFailures => f.write_str("r_failures"),
            Q1 => f.write_str("q1"),
            Q2 => f.write_str("q2"),
            Q3 => f.write_str("q3"),
            Q4(ind) => write!(f, "q4:{ind}"),
            Q5 => f.write_str("q5"),
            Q6(s) => write!(f, "q6:{s}"),
        }
    }
}

impl FromStr for MetricSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use MetricSelector::*;
        if let Some(ind) = s.strip_prefix("q4:") {
            return Ok(Q4(ind.parse()?));
        }
        if let Some(sit) = s.strip_prefix("q6:") {
            if sit.is_empty() {
                return Err("q6 needs a situation id, e.g. q6:cutin".into());
            }
            return Ok(Q6(sit.to_string()));
        }
        Ok(match s {
            "r_succeeded" => RSucceeded,
            "r_failed" => RFailed,
            "r_plus" => RPlus,
            "r_minus" => RMinus,
            "last_failed" => LastFailed,
            "neg_age" => NegAge,
            "r_failures" => RFailures,
            "q1" => Q1,
            "q2" => Q2,
            "q3" | "mtbtf" => Q3,
            "q5" => Q5,
            "q4" => return Err("q4 needs an indicator, e.g. q4:mccabe".into()),
            "q6" => return Err("q6 needs a situation id, e.g. q6:cutin".into()),
            other => return Err(format!("unknown metric selector {other:?}")),
        })
    }
}

impl TryFrom<String> for MetricSelector {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<MetricSelector> for String {
    fn from(s: MetricSelector) -> Self {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for text in ["r_plus", "neg_age", "q1", "q3", "q4:misra_warnings", "q6:cutin"] {
            let s: MetricSelector = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert_eq!("mtbtf".parse::<MetricSelector>(), Ok(MetricSelector::Q3));
        assert!("q4".parse::<MetricSelector>().is_err());
        assert!("q4:loc".parse::<MetricSelector>().is_err());
        assert!("q6:".parse::<MetricSelector>().is_err());
        assert!("q7".parse::<MetricSelector>().is_err());
        assert!(!MetricSelector::RPlus.is_q_metric());
        assert!(MetricSelector::Q6("x".into()).is_q_metric());
    }
}
