use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// 99% two-sided normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtMost,
    AtLeast,
    Above,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Self::Below => value < threshold,
            Self::AtMost => value <= threshold,
            Self::AtLeast => value >= threshold,
            Self::Above => value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub statistic: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub statistics: BTreeMap<String, f64>,
    /// Intervals at the level stated in `ci_level`.
    pub ci: BTreeMap<String, (f64, f64)>,
    pub ci_level: f64,
    pub verdicts: Vec<Verdict>,
    pub provenance: Vec<String>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, provenance: &[String]) -> Self {
        Self { name: name.into(), ci_level: 0.99, provenance: provenance.to_vec(), ..Default::default() }
    }

    pub fn stat(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.statistics.insert(key.into(), value);
        self
    }

    pub fn interval(&mut self, key: impl Into<String>, bounds: (f64, f64)) -> &mut Self {
        self.ci.insert(key.into(), bounds);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Records a verdict on an already recorded statistic.
    ///
    /// # Panics
    /// If `statistic` has not been recorded.
    pub fn check(&mut self, criterion: impl Into<String>, statistic: &str, comparison: Comparison, threshold: f64) -> bool {
        let value = *self
            .statistics
            .get(statistic)
            .unwrap_or_else(|| panic!("verdict on unrecorded statistic {statistic}"));
        let passed = comparison.holds(value, threshold);
        self.verdicts.push(Verdict {
            criterion: criterion.into(),
            statistic: statistic.to_string(),
            value,
            comparison,
            threshold,
            passed,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }

    pub fn get(&self, statistic: &str) -> Option<f64> {
        self.statistics.get(statistic).copied()
    }

    /// Appends another report's statistics and verdicts under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        for (k, v) in other.statistics {
            self.statistics.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.ci {
            self.ci.insert(format!("{prefix}.{k}"), v);
        }
        for mut v in other.verdicts {
            v.statistic = format!("{prefix}.{}", v.statistic);
            self.verdicts.push(v);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_reference_statistics() {
        let mut r = ExperimentReport::new("demo", &[]);
        r.stat("ks", 0.01);
        assert!(r.check("ks small", "ks", Comparison::Below, 0.03));
        assert!(!r.check("ks tiny", "ks", Comparison::Below, 0.005));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentReport>(&json).unwrap(), r);
    }

    #[test]
    #[should_panic(expected = "unrecorded")]
    fn unknown_statistic_panics() {
        ExperimentReport::new("demo", &[]).check("x", "missing", Comparison::Below, 1.0);
    }
}
