//! Quenched laws under a frozen scenery, Strassen matching and the
//! nonconvergence verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::Verdict;
use crate::bounds::{s_of_f, CALIBRATED_TRUNCATION_CONSTANT};
use crate::error::{invalid, Error, Result};
use crate::local_time::walk_local_time;
use crate::rwrs::{compute_k_local_time, kappa, rescale, LOGLOG_THRESHOLD};
use crate::sampler::{simulate_srw, QuenchedField, SiteScenery};
use crate::stats::{ks_distance, mean, wasserstein1, EmpiricalDistribution};
use crate::strassen::{sup_distance, uniform_lil_statistic, DictionaryTarget, ProfileSource, StrassenFunction};
use crate::theta::{path_seed, sample_occupation, unit_path, Discretization, EdgeTable, Region};

/// Law of a rescaled scenery sum at one time, the scenery held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchedLawPoint {
    pub lambda: f64,
    /// `n` for walks, `t` for Brownian motion; `lambda = time^{1/2}`.
    pub time: f64,
    pub law: EmpiricalDistribution,
    pub matched_target: Option<DictionaryTarget>,
    pub match_sup_distance: Option<f64>,
}

/// Law of `K_n / (2 n^{3/2} ln ln n)^{1/2}` over independent walks.
pub fn quenched_law_discrete_on(
    scenery: &impl SiteScenery,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<QuenchedLawPoint> {
    let time = n as f64;
    if !(time > LOGLOG_THRESHOLD) {
        return Err(Error::BelowLogLogDomain(time));
    }
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    let samples = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let grid = walk_local_time(&simulate_srw(n, path_seed(seed, i)));
            Ok(rescale(compute_k_local_time(&grid, scenery), time)?.scaled)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuenchedLawPoint {
        lambda: time.sqrt(),
        time,
        law: EmpiricalDistribution::new(samples)?.with_provenance("quenched_law_discrete", seed),
        matched_target: None,
        match_sup_distance: None,
    })
}

pub fn quenched_law_discrete(field: &QuenchedField, n: usize, replicas: usize, seed: u64) -> Result<QuenchedLawPoint> {
    quenched_law_discrete_on(&field.as_discrete()?, n, replicas, seed)
}

/// `H_lambda` on `replicas` unit paths.
pub fn h_lambda_samples(table: &EdgeTable, replicas: usize, seed: u64, disc: Discretization) -> Result<Vec<f64>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (_, grid) = unit_path(path_seed(seed, i), disc)?;
            table.pairing(&grid, Region::All)
        })
        .collect()
}

/// Law of `Z_t / (2 t^{3/2} ln ln t)^{1/2}`, sampled as `-kappa(t) H_lambda`
/// with `lambda = t^{1/2}`.
pub fn quenched_law_bmbs(
    source: &dyn ProfileSource,
    t: f64,
    replicas: usize,
    seed: u64,
    disc: Discretization,
) -> Result<QuenchedLawPoint> {
    let lambda = t.sqrt();
    if !(lambda > LOGLOG_THRESHOLD) {
        return Err(Error::BelowLogLogDomain(lambda));
    }
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    let k = kappa(t)?;
    let table = EdgeTable::build(source, lambda, disc.h)?;
    let samples = h_lambda_samples(&table, replicas, seed, disc)?
        .into_iter()
        .map(|h| -k * h)
        .collect();
    Ok(QuenchedLawPoint {
        lambda,
        time: t,
        law: EmpiricalDistribution::new(samples)?.with_provenance("quenched_law_bmbs", seed),
        matched_target: None,
        match_sup_distance: None,
    })
}

pub fn quenched_law_bmbs_field(
    field: &QuenchedField,
    t: f64,
    replicas: usize,
    seed: u64,
    disc: Discretization,
) -> Result<QuenchedLawPoint> {
    let w = field.as_continuum()?;
    quenched_law_bmbs(&w, t, replicas, seed, disc)
}

/// `(lambda, sup distance)` for every grid point whose rescaled profile is
/// within `epsilon` of `f` on the window, in ascending `lambda`.
pub fn match_distances(
    source: &dyn ProfileSource,
    f: &StrassenFunction,
    window: (f64, f64),
    epsilon: f64,
    lambdas: &[f64],
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut grid = lambdas.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut hits = Vec::new();
    for lambda in grid {
        let d = sup_distance(&source.rescaled(lambda, window, step)?, f);
        if d <= epsilon {
            hits.push((lambda, d));
        }
    }
    Ok(hits)
}

pub fn find_matching_times(
    source: &dyn ProfileSource,
    f: &StrassenFunction,
    window: (f64, f64),
    epsilon: f64,
    lambdas: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    Ok(match_distances(source, f, window, epsilon, lambdas, step)?
        .into_iter()
        .map(|(l, _)| l)
        .collect())
}

/// `(5 + A_W) eps` plus the truncation slack outside the window
/// `[-n, n]`: `c e^{-n^2/4} A_W + 4 (2 s(f))^{1/2} e^{-n^2/4}`.
pub fn l1_budget(f: &StrassenFunction, epsilon: f64, a_w: f64, n: f64) -> f64 {
    let decay = (-n * n / 4.0).exp();
    (5.0 + a_w) * epsilon + CALIBRATED_TRUNCATION_CONSTANT * decay * a_w + 4.0 * (2.0 * s_of_f(f)).sqrt() * decay
}

/// The quenched law at a matched `(lambda, f)` together with its distances to
/// the target's limit law, all measured on one set of paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedLaw {
    pub target: DictionaryTarget,
    pub point: QuenchedLawPoint,
    pub kappa: f64,
    pub a_w: f64,
    /// `E|H_lambda - int f dL_1|` on the shared paths.
    pub l1_distance: f64,
    pub budget: f64,
    pub within_budget: bool,
    /// Distances between the law of `H_lambda = -Z~ / kappa` and the law of
    /// `int f dL_1`.
    pub w1_to_theta: f64,
    pub ks_to_theta: f64,
    #[serde(skip)]
    pub h_samples: Vec<f64>,
    #[serde(skip)]
    pub theta_samples: Vec<f64>,
}

impl MatchedLaw {
    pub fn h_law(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(self.h_samples.clone())
    }
}

pub fn matched_law(
    source: &dyn ProfileSource,
    target: DictionaryTarget,
    lambda: f64,
    sup_dist: f64,
    cfg: &ExperimentConfig,
) -> Result<MatchedLaw> {
    let disc = cfg.discretization();
    let f = target.function();
    let table = EdgeTable::build(source, lambda, disc.h)?;
    let a_w = uniform_lil_statistic(table.profile());
    let pairs = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (path, grid) = unit_path(path_seed(cfg.path_seed, i), disc)?;
            Ok((table.pairing(&grid, Region::All)?, sample_occupation(&f, &path)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (h_samples, theta_samples): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let gaps: Vec<f64> = h_samples
        .iter()
        .zip(&theta_samples)
        .map(|(h, th)| (h - th).abs())
        .collect();
    let l1_distance = mean(&gaps);
    let t = lambda * lambda;
    let k = kappa(t)?;
    let h_law = EmpiricalDistribution::new(h_samples.clone())?;
    let theta_law = EmpiricalDistribution::new(theta_samples.clone())?;
    let w1_to_theta = wasserstein1(&h_law, &theta_law);
    let n = cfg.window.0.abs().min(cfg.window.1);
    let budget = l1_budget(&f, cfg.epsilon, a_w, n);
    let law = EmpiricalDistribution::new(h_samples.iter().map(|h| -k * h).collect())?
        .with_provenance("quenched_law_bmbs", cfg.path_seed);
    Ok(MatchedLaw {
        target,
        point: QuenchedLawPoint {
            lambda,
            time: t,
            law,
            matched_target: Some(target),
            match_sup_distance: Some(sup_dist),
        },
        kappa: k,
        a_w,
        l1_distance,
        budget,
        within_budget: l1_distance <= budget && w1_to_theta <= budget,
        w1_to_theta,
        ks_to_theta: ks_distance(&h_law, &theta_law),
        h_samples,
        theta_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMatches {
    pub target: DictionaryTarget,
    pub lambdas: Vec<f64>,
    pub sup_distances: Vec<f64>,
}

/// Matched laws for a list of targets. Laws are built at the first
/// `max_laws` matches of each target.
pub fn matched_laws(
    source: &dyn ProfileSource,
    targets: &[DictionaryTarget],
    cfg: &ExperimentConfig,
    max_laws: usize,
) -> Result<(Vec<TargetMatches>, Vec<MatchedLaw>)> {
    let lambdas = cfg.lambda_grid();
    let mut matches = Vec::new();
    let mut laws = Vec::new();
    for &target in targets {
        let hits = match_distances(
            source,
            &target.function(),
            cfg.window,
            cfg.epsilon,
            &lambdas,
            cfg.profile_step,
        )?;
        for &(lambda, d) in hits.iter().take(max_laws) {
            laws.push(matched_law(source, target, lambda, d, cfg)?);
        }
        let (lambdas, sup_distances) = hits.into_iter().unzip();
        matches.push(TargetMatches {
            target,
            lambdas,
            sup_distances,
        });
    }
    Ok((matches, laws))
}

/// Laws per target built by [`nonconvergence_report`].
pub const LAWS_PER_TARGET: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonconvergenceReport {
    pub matches: Vec<TargetMatches>,
    pub laws: Vec<MatchedLaw>,
    /// Pairwise KS between the `H_lambda` laws, in the order of `laws`.
    pub ks_matrix: Vec<Vec<f64>>,
    /// Largest KS between laws matched to distinct targets.
    pub max_cross_ks: Option<f64>,
    pub separation_threshold: f64,
    pub all_within_budget: bool,
    /// At least two distinct targets were matched.
    pub conclusive: bool,
    pub separated: bool,
    pub verdict: Verdict,
}

/// Matches every target, builds the quenched laws at the matches and decides
/// whether distinct limit points are evidenced: the largest KS between laws of
/// distinct targets reaches the separation threshold, and every matched law
/// lies within its `L^1` budget of its target's limit law.
///
/// Fewer than two matched targets gives `Inconclusive`; no law is built then.
pub fn nonconvergence_report(
    source: &dyn ProfileSource,
    targets: &[DictionaryTarget],
    cfg: &ExperimentConfig,
) -> Result<NonconvergenceReport> {
    if targets.is_empty() {
        return Err(invalid("need at least one target"));
    }
    let lambdas = cfg.lambda_grid();
    let mut matched_targets = 0;
    for target in targets {
        let hits = find_matching_times(
            source,
            &target.function(),
            cfg.window,
            cfg.epsilon,
            &lambdas,
            cfg.profile_step,
        )?;
        matched_targets += usize::from(!hits.is_empty());
    }
    let (matches, laws) = if matched_targets >= 2 {
        matched_laws(source, targets, cfg, LAWS_PER_TARGET)?
    } else {
        (matched_laws(source, targets, cfg, 0)?.0, Vec::new())
    };
    let h_laws = laws.iter().map(MatchedLaw::h_law).collect::<Result<Vec<_>>>()?;
    let ks_matrix: Vec<Vec<f64>> = h_laws
        .iter()
        .map(|a| h_laws.iter().map(|b| ks_distance(a, b)).collect())
        .collect();
    let mut max_cross_ks: Option<f64> = None;
    for (i, a) in laws.iter().enumerate() {
        for (j, b) in laws.iter().enumerate() {
            if a.target != b.target {
                max_cross_ks = Some(max_cross_ks.unwrap_or(0.0).max(ks_matrix[i][j]));
            }
        }
    }
    let all_within_budget = laws.iter().all(|l| l.within_budget);
    let conclusive = matched_targets >= 2;
    let separated = max_cross_ks.is_some_and(|k| k >= cfg.separation_threshold);
    let verdict = if !conclusive {
        Verdict::Inconclusive
    } else if separated && all_within_budget {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(NonconvergenceReport {
        matches,
        laws,
        ks_matrix,
        max_cross_ks,
        separation_threshold: cfg.separation_threshold,
        all_within_budget,
        conclusive,
        separated,
        verdict,
    })
}
