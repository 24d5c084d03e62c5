use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prng::{artifact_seed, SplitMix64};
use crate::history::{
    ArtifactHistory, ArtifactId, HistorySet, IndicatorSample, RevisionRecord, TestOutcome,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: &str) -> SynthError {
    SynthError::InvalidConfig {
        field: field.into(),
        reason: reason.to_string(),
    }
}

/// A value with Gaussian jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub mean: f64,
    #[serde(default)]
    pub jitter: f64,
}

/// `base + rate * (i - 1)` plus jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drift {
    pub base: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    pub sloc_base: f64,
    #[serde(default)]
    pub sloc_growth: f64,
    pub misra: Drift,
    pub mccabe: Drift,
    pub uncovered: Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SituationConfig {
    pub id: String,
    pub mean: f64,
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectionKind {
    /// Lowers the pass probability by `magnitude` (absolute).
    FailureRate,
    /// Scales the mean duration by `1 + magnitude`.
    DurationDrift,
    /// Scales the acting time jitter by `magnitude`.
    ActingVariance,
    /// Scales MISRA, McCabe and uncovered values by `1 + magnitude`.
    IndicatorSpike,
}

/// A regression active from revision `start` onward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub start: usize,
    pub kind: InjectionKind,
    pub magnitude: f64,
}

/// Parameters of a synthetic corpus. Identical configs generate identical
/// histories, bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub artifacts: usize,
    pub revisions: usize,
    pub pass_probability: f64,
    #[serde(default = "default_prefix")]
    pub artifact_prefix: String,
    #[serde(default)]
    pub indicators: Option<IndicatorConfig>,
    #[serde(default)]
    pub duration: Option<Level>,
    #[serde(default)]
    pub situations: Vec<SituationConfig>,
    /// Probability that any single measurement is left out.
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub injections: Vec<Injection>,
    pub seed: u64,
}

fn default_prefix() -> String {
    "A".to_string()
}

impl GeneratorConfig {
    /// Outcomes only, no measurements.
    pub fn outcomes_only(artifacts: usize, revisions: usize, pass_probability: f64, seed: u64) -> Self {
        Self {
            artifacts,
            revisions,
            pass_probability,
            artifact_prefix: default_prefix(),
            indicators: None,
            duration: None,
            situations: Vec::new(),
            missing_rate: 0.0,
            injections: Vec::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.artifacts == 0 {
            return Err(invalid("artifacts", "must be at least 1"));
        }
        if self.revisions == 0 {
            return Err(invalid("revisions", "must be at least 1"));
        }
        if ArtifactId::new(self.artifact_prefix.clone()).is_err() {
            return Err(invalid("artifact_prefix", "must not be blank"));
        }
        probability("pass_probability", self.pass_probability)?;
        probability("missing_rate", self.missing_rate)?;
        if let Some(ind) = &self.indicators {
            non_negative("indicators.sloc_base", ind.sloc_base)?;
            finite("indicators.sloc_growth", ind.sloc_growth)?;
            for (name, d) in [("misra", &ind.misra), ("mccabe", &ind.mccabe), ("uncovered", &ind.uncovered)] {
                finite(&format!("indicators.{name}.base"), d.base)?;
                finite(&format!("indicators.{name}.rate"), d.rate)?;
                non_negative(&format!("indicators.{name}.jitter"), d.jitter)?;
            }
        }
        if let Some(d) = &self.duration {
            non_negative("duration.mean", d.mean)?;
            non_negative("duration.jitter", d.jitter)?;
        }
        for (k, s) in self.situations.iter().enumerate() {
            if s.id.is_empty() {
                return Err(invalid(format!("situations[{k}].id"), "must not be empty"));
            }
            if self.situations[..k].iter().any(|o| o.id == s.id) {
                return Err(invalid(format!("situations[{k}].id"), "duplicate id"));
            }
            non_negative(&format!("situations[{k}].mean"), s.mean)?;
            non_negative(&format!("situations[{k}].jitter"), s.jitter)?;
        }
        for (k, inj) in self.injections.iter().enumerate() {
            if inj.start == 0 {
                return Err(invalid(format!("injections[{k}].start"), "revisions start at 1"));
            }
            finite(&format!("injections[{k}].magnitude"), inj.magnitude)?;
            let ok = match inj.kind {
                InjectionKind::FailureRate => true,
                InjectionKind::DurationDrift | InjectionKind::IndicatorSpike => inj.magnitude > -1.0,
                InjectionKind::ActingVariance => inj.magnitude >= 0.0,
            };
            if !ok {
                return Err(invalid(format!("injections[{k}].magnitude"), "out of range for kind"));
            }
        }
        Ok(())
    }

    fn artifact_id(&self, index: usize) -> ArtifactId {
        let width = self.artifacts.to_string().len();
        ArtifactId::new(format!("{}{:0width$}", self.artifact_prefix, index + 1))
            .expect("prefix validated")
    }
}

fn finite(field: &str, x: f64) -> Result<(), SynthError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be finite"))
    }
}

fn non_negative(field: &str, x: f64) -> Result<(), SynthError> {
    finite(field, x)?;
    if x < 0.0 {
        return Err(invalid(field, "must be >= 0"));
    }
    Ok(())
}

fn probability(field: &str, x: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(field, "must lie in [0, 1]"))
    }
}

struct Effects {
    pass_probability: f64,
    duration_scale: f64,
    acting_jitter_scale: f64,
    indicator_scale: f64,
}

fn effects_at(config: &GeneratorConfig, revision: usize) -> Effects {
    let mut e = Effects {
        pass_probability: config.pass_probability,
        duration_scale: 1.0,
        acting_jitter_scale: 1.0,
        indicator_scale: 1.0,
    };
    for inj in config.injections.iter().filter(|inj| inj.start <= revision) {
        match inj.kind {
            InjectionKind::FailureRate => e.pass_probability -= inj.magnitude,
            InjectionKind::DurationDrift => e.duration_scale *= 1.0 + inj.magnitude,
            InjectionKind::ActingVariance => e.acting_jitter_scale *= inj.magnitude,
            InjectionKind::IndicatorSpike => e.indicator_scale *= 1.0 + inj.magnitude,
        }
    }
    e.pass_probability = e.pass_probability.clamp(0.0, 1.0);
    e
}

fn drifted(d: &Drift, revision: usize, z: f64, scale: f64, floor: f64) -> u64 {
    let x = (d.base + d.rate * (revision - 1) as f64 + d.jitter * z) * scale;
    x.round().max(floor) as u64
}

/// History of the `index`-th artifact (0-based). The config must be valid.
///
/// Per revision the stream is consumed in a fixed order whatever the
/// outcome: the outcome draw, then three indicator normals and four
/// omission draws, then the duration normal and its omission draw, then a
/// normal and an omission draw per situation.
pub fn generate_artifact(config: &GeneratorConfig, index: usize) -> ArtifactHistory {
    let id = config.artifact_id(index);
    let mut rng = SplitMix64::new(artifact_seed(config.seed, index));
    let mut records = Vec::with_capacity(config.revisions);
    for i in 1..=config.revisions {
        let fx = effects_at(config, i);
        let outcome = if rng.next_f64() < fx.pass_probability {
            TestOutcome::Pass
        } else {
            TestOutcome::Fail
        };
        let mut sample = IndicatorSample::default();
        let keep = |rng: &mut SplitMix64| rng.next_f64() >= config.missing_rate;

        if let Some(ind) = &config.indicators {
            let z = [rng.next_normal(), rng.next_normal(), rng.next_normal()];
            let sloc = (ind.sloc_base + ind.sloc_growth * (i - 1) as f64).round().max(1.0) as u64;
            let misra = drifted(&ind.misra, i, z[0], fx.indicator_scale, 0.0);
            let mccabe = drifted(&ind.mccabe, i, z[1], fx.indicator_scale, 1.0);
            let uncovered = drifted(&ind.uncovered, i, z[2], fx.indicator_scale, 0.0);
            sample.sloc = keep(&mut rng).then_some(sloc);
            sample.misra_warnings = keep(&mut rng).then_some(misra);
            sample.mccabe = keep(&mut rng).then_some(mccabe);
            sample.uncovered = keep(&mut rng).then_some(uncovered);
        }
        if let Some(d) = &config.duration {
            let z = rng.next_normal();
            let kept = keep(&mut rng);
            if outcome.is_pass() && kept {
                sample.duration = Some((d.mean * fx.duration_scale + d.jitter * z).max(0.0));
            }
        }
        for s in &config.situations {
            let z = rng.next_normal();
            let kept = keep(&mut rng);
            if outcome.is_pass() && kept {
                let t = (s.mean + s.jitter * fx.acting_jitter_scale * z).max(0.0);
                sample.acting.insert(s.id.clone(), t);
            }
        }
        records.push(RevisionRecord::new(id.clone(), i, outcome).with_indicators(sample));
    }
    ArtifactHistory::new(id, records).expect("generated revisions are dense")
}

/// Every artifact of the config; artifacts are generated in parallel from
/// independent sub-seeds.
pub fn generate(config: &GeneratorConfig) -> Result<HistorySet, SynthError> {
    config.validate()?;
    let histories: Vec<ArtifactHistory> = (0..config.artifacts)
        .into_par_iter()
        .map(|k| generate_artifact(config, k))
        .collect();
    let mut set = HistorySet::new();
    for h in histories {
        set.insert(h);
    }
    Ok(set)
}

/// A small, varied config derived from `seed`: short histories, extreme and
/// middling pass rates, occasional gaps in the measurements and random
/// injections. Used to build test corpora.
pub fn varied_config(seed: u64) -> GeneratorConfig {
    let mut g = SplitMix64::new(seed);
    let mut below = |n: u64| g.next_u64() % n;
    let artifacts = 1 + below(3) as usize;
    let revisions = 1 + below(80) as usize;
    let pass_probability = match below(8) {
        0 => 0.0,
        1 => 1.0,
        k => k as f64 / 8.0,
    };
    let missing_rate = if below(4) == 0 { 0.02 } else { 0.0 };
    let with_indicators = below(5) != 0;
    let with_duration = below(5) != 0;
    let situations = (0..below(3))
        .map(|k| SituationConfig {
            id: ["cutin", "pedestrian"][k as usize].to_string(),
            mean: 1.0 + below(20) as f64 / 10.0,
            jitter: below(5) as f64 / 20.0,
        })
        .collect();
    let injections = (0..below(3))
        .map(|_| Injection {
            start: 1 + below(revisions as u64) as usize,
            kind: [
                InjectionKind::FailureRate,
                InjectionKind::DurationDrift,
                InjectionKind::ActingVariance,
                InjectionKind::IndicatorSpike,
            ][below(4) as usize],
            magnitude: 0.1 + below(30) as f64 / 10.0,
        })
        .collect();
    let indicators = with_indicators.then(|| IndicatorConfig {
        sloc_base: 100.0 + below(1000) as f64,
        sloc_growth: below(10) as f64,
        misra: Drift {
            base: below(30) as f64,
            rate: below(5) as f64 / 10.0,
            jitter: below(4) as f64,
        },
        mccabe: Drift {
            base: 1.0 + below(20) as f64,
            rate: below(3) as f64 / 10.0,
            jitter: below(3) as f64,
        },
        uncovered: Drift {
            base: below(50) as f64,
            rate: 0.0,
            jitter: below(5) as f64,
        },
    });
    let duration = with_duration.then(|| Level {
        mean: 1.0 + below(100) as f64 / 10.0,
        jitter: below(10) as f64 / 10.0,
    });
    GeneratorConfig {
        artifacts,
        revisions,
        pass_probability,
        artifact_prefix: "S".to_string(),
        indicators,
        duration,
        situations,
        missing_rate,
        injections,
        seed,
    }
}
