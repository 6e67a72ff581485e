use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rwrs::LOGLOG_THRESHOLD;
use crate::sampler::SceneryLaw;
use crate::strassen::DictionaryTarget;
use crate::theta::Discretization;

/// Every knob of every experiment. Missing TOML fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenery_seed: u64,
    /// Base seed for walks and Brownian paths.
    pub path_seed: u64,
    /// `ln` of the first grid point `lambda_0`.
    pub log_lambda0: f64,
    /// `ln` of the grid ratio.
    pub log_lambda_ratio: f64,
    pub lambda_count: usize,
    pub window: (f64, f64),
    pub epsilon: f64,
    /// Spacing of the grid on which `W_lambda` is compared with targets.
    pub profile_step: f64,
    pub dt: f64,
    pub h: f64,
    pub replicas: usize,
    pub targets: Vec<DictionaryTarget>,
    pub out_dir: PathBuf,
    /// Minimum pairwise KS between matched laws of distinct targets.
    pub separation_threshold: f64,
    pub scenery_law: SceneryLaw,
    pub n_schedule: Vec<usize>,
    pub lemma_paths: usize,
    pub truncation_radii: Vec<f64>,
    /// `ln lambda` at which the `H_lambda` truncation bound is checked.
    pub truncation_log_lambda: f64,
    pub verify_paths: usize,
    pub symmetry_paths: usize,
    pub scaling_time: f64,
    /// Number of scenery seeds tried when a single nonconvergence run is
    /// inconclusive.
    pub scan_seeds: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenery_seed: 1,
            path_seed: 2,
            log_lambda0: 3.0,
            log_lambda_ratio: 0.25,
            lambda_count: 37,
            window: (-1.0, 1.0),
            epsilon: 0.4,
            profile_step: 1.0 / 128.0,
            dt: 1e-4,
            h: 0.02,
            replicas: 5000,
            targets: vec![DictionaryTarget::Zero, DictionaryTarget::TentRamp],
            out_dir: PathBuf::from("out"),
            separation_threshold: 0.1,
            scenery_law: SceneryLaw::Rademacher,
            n_schedule: vec![1 << 12, 1 << 14, 1 << 16],
            lemma_paths: 10_000,
            truncation_radii: vec![0.0, 1.0, 2.0, 3.0],
            truncation_log_lambda: 4.0,
            verify_paths: 1000,
            symmetry_paths: 10_000,
            scaling_time: 16.0,
            scan_seeds: 20,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0() > LOGLOG_THRESHOLD) {
            return Err(invalid(format!("lambda_0 = {} must exceed e^e", self.lambda0())));
        }
        if !(self.log_lambda_ratio > 0.0) {
            return Err(invalid("lambda ratio must exceed 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon must be positive"));
        }
        if self.replicas < 100 {
            return Err(invalid(format!("need at least 100 replicas, got {}", self.replicas)));
        }
        if !(self.window.0 < 0.0 && self.window.1 > 0.0) {
            return Err(invalid("window must satisfy s < 0 < r"));
        }
        if !(self.dt > 0.0 && self.dt < 1.0 && self.h > 0.0 && self.profile_step > 0.0) {
            return Err(invalid("dt must lie in (0, 1); h and profile_step must be positive"));
        }
        if self.truncation_radii.iter().any(|&n| !(n >= 0.0)) {
            return Err(invalid("truncation radii must be nonnegative"));
        }
        if !(self.truncation_log_lambda.exp() > LOGLOG_THRESHOLD) {
            return Err(invalid("truncation lambda must exceed e^e"));
        }
        if self.n_schedule.is_empty() || self.n_schedule.contains(&0) {
            return Err(invalid("n schedule must be a nonempty list of positive sizes"));
        }
        if !(self.scaling_time > 0.0) {
            return Err(invalid("scaling time must be positive"));
        }
        Ok(())
    }

    pub fn lambda0(&self) -> f64 {
        self.log_lambda0.exp()
    }

    /// `lambda_0 r^i` for `i < lambda_count`, ascending.
    pub fn lambda_grid(&self) -> Vec<f64> {
        (0..self.lambda_count)
            .map(|i| (self.log_lambda0 + self.log_lambda_ratio * i as f64).exp())
            .collect()
    }

    pub fn discretization(&self) -> Discretization {
        Discretization { dt: self.dt, h: self.h }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let grid = cfg.lambda_grid();
        assert_eq!(grid.len(), 37);
        assert!((grid[36].ln() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let cfg = ExperimentConfig::default();
        assert_eq!(
            ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(),
            cfg
        );
        let partial = ExperimentConfig::from_toml_str("replicas = 200\ntargets = [\"symmetric_hat\"]\n").unwrap();
        assert_eq!(partial.replicas, 200);
        assert_eq!(partial.targets, vec![DictionaryTarget::SymmetricHat]);
        assert_eq!(partial.epsilon, 0.4);
    }

    #[test]
    fn invalid_configs_rejected() {
        for text in [
            "log_lambda0 = 2.5",
            "log_lambda_ratio = 0.0",
            "epsilon = 0.0",
            "replicas = 99",
            "bogus = 1",
        ] {
            assert!(ExperimentConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
