use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::stats::EmpiricalDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// `Fail` dominates `Inconclusive`, which dominates `Pass`.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_checks(checks: &[Check]) -> Verdict {
        if checks.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One asserted inequality `value <= threshold` (or its reverse, see
/// `direction`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"le"` or `"ge"`.
    pub direction: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            direction: "le".into(),
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            direction: "ge".into(),
            passed: value >= threshold,
        }
    }
}

/// Named sample vector emitted by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub name: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// Everything needed to re-run an experiment: the subcommand and the full
/// configuration, plus the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub config: ExperimentConfig,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    /// Sample file names relative to the output directory.
    pub sample_files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub samples: Vec<SampleSet>,
    /// Other text files, `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn verdict(&self) -> Verdict {
        self.summary.verdict
    }

    pub fn sample(&self, name: &str) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    /// Writes `<name>.csv` and `<name>_ecdf.csv` per sample set and
    /// `summary.json`, returning the summary path.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        self.summary.sample_files.clear();
        for set in &self.samples {
            let file = format!("{}.csv", set.name);
            std::fs::write(dir.join(&file), values_csv(&set.values))?;
            if !set.values.is_empty() {
                let ecdf = EmpiricalDistribution::new(set.values.clone())?.ecdf_csv();
                std::fs::write(dir.join(format!("{}_ecdf.csv", set.name)), ecdf)?;
            }
            self.summary.sample_files.push(file);
        }
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        let path = dir.join("summary.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.summary)?)?;
        Ok(path)
    }
}

/// `value` header and one row per sample, in generation order. Rust's float
/// formatting round-trips exactly.
pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::from("value\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn read_values_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some("value") {
        return Err(Error::Parse("sample file must start with a `value` header".into()));
    }
    lines
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad sample `{l}`: {e}")))
        })
        .collect()
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
