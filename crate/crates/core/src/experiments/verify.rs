//! Estimator cross-checks, per-path bounds, reflection symmetry and the
//! moment/truncation inequalities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ExperimentConfig;
use super::output::Check;
use crate::bounds::{
    check_truncation_h, collect_lemma_samples, second_moment_report, truncation_f_report, BoundReport,
};
use crate::error::Result;
use crate::rng::split;
use crate::sampler::ContinuumScenery;
use crate::stats::{ks_distance, mean, quantile_sorted, EmpiricalDistribution};
use crate::strassen::{DictionaryTarget, StrassenFunction};
use crate::theta::{path_seed, sample_occupation, theta_sample_on, unit_path, Discretization, ThetaSample};

pub const MEDIAN_TOLERANCE: f64 = 0.02;
pub const P95_TOLERANCE: f64 = 0.1;
pub const CAUCHY_SCHWARZ_SLACK: f64 = 0.05;
pub const SYMMETRY_TOLERANCE: f64 = 0.03;

const SYMMETRY_TAG: u64 = 0x5245_464C;

/// Three-estimator samples for every function on `n_paths` shared paths,
/// indexed `[function][path]`.
pub fn shared_theta_samples(
    functions: &[StrassenFunction],
    n_paths: usize,
    seed: u64,
    disc: Discretization,
) -> Result<Vec<Vec<ThetaSample>>> {
    let rows = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let s = path_seed(seed, i);
            let (path, grid) = unit_path(s, disc)?;
            Ok(functions
                .iter()
                .map(|f| theta_sample_on(f, s, &path, &grid))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..functions.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancySummary {
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

pub fn discrepancy_summary(samples: &[ThetaSample]) -> DiscrepancySummary {
    let mut d: Vec<f64> = samples.iter().map(ThetaSample::max_discrepancy).collect();
    d.sort_by(f64::total_cmp);
    DiscrepancySummary {
        median: quantile_sorted(&d, 0.5),
        p95: quantile_sorted(&d, 0.95),
        max: *d.last().unwrap(),
    }
}

/// Largest `value^2 - sup L` over samples and all three estimators.
pub fn cauchy_schwarz_excess(samples: &[ThetaSample]) -> f64 {
    samples
        .iter()
        .flat_map(|s| [s.value_occupation, s.value_stieltjes, s.value_ito].map(|v| v * v - s.sup_local_time))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `x -> -f(-x)`. On the reflected path `-B` it pairs to the same value as
/// `f` on `B`, so its law under `B` equals that of `int f dL_1`.
pub fn point_reflection(f: &StrassenFunction) -> StrassenFunction {
    f.reflected().negated()
}

/// `(direct, mirrored)` samples, each indexed `[function][path]`.
pub type ReflectionSamples = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Occupation values of `f` on paths of `seed` and of its point reflection
/// on the reflected paths of an independent seed.
pub fn reflection_samples(
    functions: &[StrassenFunction],
    n_paths: usize,
    seed: u64,
    disc: Discretization,
) -> Result<ReflectionSamples> {
    let reflected: Vec<StrassenFunction> = functions.iter().map(point_reflection).collect();
    let other = split(seed, SYMMETRY_TAG);
    let rows = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (a, _) = unit_path(path_seed(seed, i), disc)?;
            let (b, _) = unit_path(path_seed(other, i), disc)?;
            let b = b.reflected();
            Ok(functions
                .iter()
                .zip(&reflected)
                .map(|(f, g)| (sample_occupation(f, &a), sample_occupation(g, &b)))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let direct = (0..functions.len())
        .map(|j| rows.iter().map(|r| r[j].0).collect())
        .collect();
    let mirrored = (0..functions.len())
        .map(|j| rows.iter().map(|r| r[j].1).collect())
        .collect();
    Ok((direct, mirrored))
}

pub struct IdentityRun {
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    pub default_samples: Vec<Vec<ThetaSample>>,
    pub symmetry: ReflectionSamples,
}

pub fn verify_identities(cfg: &ExperimentConfig) -> Result<IdentityRun> {
    let targets = DictionaryTarget::ALL;
    let functions: Vec<StrassenFunction> = targets.iter().map(|t| t.function()).collect();
    let disc = cfg.discretization();
    let coarse = shared_theta_samples(&functions, cfg.verify_paths, cfg.path_seed, disc)?;
    let fine = shared_theta_samples(&functions, cfg.verify_paths, cfg.path_seed, disc.halved())?;
    let symmetry = reflection_samples(&functions, cfg.symmetry_paths, cfg.path_seed, disc)?;
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    for (j, t) in targets.iter().enumerate() {
        let name = t.name();
        let a = discrepancy_summary(&coarse[j]);
        let b = discrepancy_summary(&fine[j]);
        checks.push(Check::at_most(
            format!("median_discrepancy_{name}"),
            a.median,
            MEDIAN_TOLERANCE,
        ));
        checks.push(Check::at_most(format!("p95_discrepancy_{name}"), a.p95, P95_TOLERANCE));
        // a median that is already exactly zero cannot shrink
        let mut halving = Check::at_most(format!("halved_median_{name}"), b.median, a.median);
        halving.passed = b.median < a.median || (a.median == 0.0 && b.median == 0.0);
        checks.push(halving);
        let excess = cauchy_schwarz_excess(&coarse[j]);
        checks.push(Check::at_most(
            format!("cauchy_schwarz_{name}"),
            excess,
            CAUCHY_SCHWARZ_SLACK,
        ));
        let ks = ks_distance(
            &EmpiricalDistribution::new(symmetry.0[j].clone())?,
            &EmpiricalDistribution::new(symmetry.1[j].clone())?,
        );
        checks.push(Check::at_most(format!("reflection_ks_{name}"), ks, SYMMETRY_TOLERANCE));
        details.insert(
            name.to_string(),
            json!({
                "discrepancy": a,
                "discrepancy_halved": b,
                "cauchy_schwarz_excess": excess,
                "reflection_ks": ks,
                "mean_occupation": mean(&coarse[j].iter().map(|s| s.value_occupation).collect::<Vec<_>>()),
            }),
        );
    }
    Ok(IdentityRun {
        checks,
        details: serde_json::Value::Object(details),
        default_samples: coarse,
        symmetry,
    })
}

pub struct LemmaRun {
    pub checks: Vec<Check>,
    pub reports: Vec<BoundReport>,
    pub h_reports: Vec<BoundReport>,
    /// `(name, samples)` for every per-path quantity.
    pub samples: Vec<(String, Vec<f64>)>,
}

/// Allowed factor between an observed decay ratio and `e^{-(n_2^2 - n_1^2)/4}`.
pub const F_DECAY_FACTOR: f64 = 4.0;
pub const H_DECAY_FACTOR: f64 = 3.0;

fn decay_bound(n1: f64, n2: f64, factor: f64) -> f64 {
    factor * (-(n2 * n2 - n1 * n1) / 4.0).exp()
}

pub fn lemma_bounds(cfg: &ExperimentConfig) -> Result<LemmaRun> {
    let targets = DictionaryTarget::ALL;
    let functions: Vec<StrassenFunction> = targets.iter().map(|t| t.function()).collect();
    let disc = cfg.discretization();
    let radii = &cfg.truncation_radii;
    let lemma = collect_lemma_samples(&functions, radii, cfg.lemma_paths, cfg.path_seed, disc)?;
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let mut samples = Vec::new();
    for (j, t) in targets.iter().enumerate() {
        let name = t.name();
        let r = second_moment_report(name, &functions[j], &lemma.squares[j], cfg.path_seed)?;
        let mut c = Check::at_most(format!("second_moment_{name}"), r.lhs_upper, r.rhs_value);
        c.passed = r.satisfied;
        checks.push(c);
        reports.push(r);
        samples.push((format!("second_moment_{name}"), lemma.squares[j].clone()));
        let mut lhs_at = Vec::new();
        for (k, &n) in radii.iter().enumerate() {
            let r = truncation_f_report(name, &functions[j], n, &lemma.tails[j][k], cfg.path_seed)?;
            let mut c = Check::at_most(format!("truncation_f_{name}_n{n}"), r.lhs_upper, r.rhs_value);
            c.passed = r.satisfied;
            checks.push(c);
            lhs_at.push((n, r.lhs_estimate));
            reports.push(r);
            samples.push((format!("truncation_f_{name}_n{n}"), lemma.tails[j][k].clone()));
        }
        let at = |n: f64| lhs_at.iter().find(|p| p.0 == n).map(|p| p.1);
        if let (Some(l1), Some(l3)) = (at(1.0), at(3.0)) {
            // identically zero tails decay trivially
            let ratio = if l1 > 0.0 { l3 / l1 } else { 0.0 };
            checks.push(Check::at_most(
                format!("decay_ratio_{name}"),
                ratio,
                decay_bound(1.0, 3.0, F_DECAY_FACTOR),
            ));
        }
    }

    let lambda = cfg.truncation_log_lambda.exp();
    let scenery = ContinuumScenery::new(cfg.scenery_seed);
    let h_reports = check_truncation_h(&scenery, lambda, radii, cfg.lemma_paths, cfg.path_seed, disc)?;
    for r in &h_reports {
        let n = r.truncation.unwrap();
        let mut c = Check::at_most(format!("truncation_h_n{n}"), r.lhs_upper, r.rhs_value);
        c.passed = r.satisfied;
        checks.push(c);
    }
    let mut order: Vec<&BoundReport> = h_reports.iter().collect();
    order.sort_by(|a, b| a.truncation.unwrap().total_cmp(&b.truncation.unwrap()));
    for w in order.windows(2) {
        let (n1, n2) = (w[0].truncation.unwrap(), w[1].truncation.unwrap());
        checks.push(Check::at_most(
            format!("truncation_h_monotone_n{n1}_n{n2}"),
            w[1].lhs_estimate,
            w[0].lhs_estimate,
        ));
        if n1 >= 1.0 && w[0].lhs_estimate > 0.0 {
            let ratio = w[1].lhs_estimate / w[0].lhs_estimate;
            checks.push(Check::at_most(
                format!("truncation_h_decay_n{n1}_n{n2}"),
                ratio,
                decay_bound(n1, n2, H_DECAY_FACTOR),
            ));
        }
    }
    Ok(LemmaRun {
        checks,
        reports,
        h_reports,
        samples,
    })
}
