//! Experiment drivers. Each command turns an [`ExperimentConfig`] into a
//! [`RunOutput`]: checks, a verdict, sample vectors and a JSON summary from
//! which the run can be replayed bit for bit.

pub mod annealed;
pub mod config;
pub mod output;
pub mod profile;
pub mod quenched;
pub mod verify;

use serde_json::json;

pub use config::ExperimentConfig;
pub use output::{Check, RunOutput, RunSummary, SampleSet, Verdict};

use crate::error::{Error, Result};
use crate::sampler::ContinuumScenery;
use crate::strassen::DictionaryTarget;
use crate::theta::{path_seed, theta_sample_on, theta_samples_csv, unit_path};
use quenched::{matched_laws, nonconvergence_report, MatchedLaw, NonconvergenceReport, LAWS_PER_TARGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyIdentities,
    LemmaBounds,
    AnnealedLimit,
    QuenchedScan,
    NonconvergenceReport,
    ThetaSample,
}

impl Command {
    pub const ALL: [Self; 6] = [
        Self::VerifyIdentities,
        Self::LemmaBounds,
        Self::AnnealedLimit,
        Self::QuenchedScan,
        Self::NonconvergenceReport,
        Self::ThetaSample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyIdentities => "verify-identities",
            Self::LemmaBounds => "lemma-bounds",
            Self::AnnealedLimit => "annealed-limit",
            Self::QuenchedScan => "quenched-scan",
            Self::NonconvergenceReport => "nonconvergence-report",
            Self::ThetaSample => "theta-sample",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown command `{s}`")))
    }
}

fn finish(
    command: Command,
    cfg: &ExperimentConfig,
    verdict: Verdict,
    checks: Vec<Check>,
    details: serde_json::Value,
    samples: Vec<SampleSet>,
) -> RunOutput {
    RunOutput {
        summary: RunSummary {
            command: command.name().to_string(),
            config: cfg.clone(),
            verdict,
            checks,
            details,
            sample_files: Vec::new(),
        },
        samples,
        files: Vec::new(),
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match command {
        Command::VerifyIdentities => run_verify_identities(cfg),
        Command::LemmaBounds => run_lemma_bounds(cfg),
        Command::AnnealedLimit => run_annealed_limit(cfg),
        Command::QuenchedScan => run_quenched_scan(cfg),
        Command::NonconvergenceReport => run_nonconvergence(cfg),
        Command::ThetaSample => run_theta_sample(cfg),
    }
}

/// Re-runs the command recorded in a summary with its recorded configuration.
pub fn replay(summary: &RunSummary) -> Result<RunOutput> {
    run(summary.command.parse()?, &summary.config)
}

fn run_verify_identities(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let r = verify::verify_identities(cfg)?;
    let mut samples = Vec::new();
    for (j, t) in DictionaryTarget::ALL.iter().enumerate() {
        let s = &r.default_samples[j];
        samples.push(SampleSet::new(
            format!("occupation_{}", t.name()),
            s.iter().map(|x| x.value_occupation).collect(),
        ));
        samples.push(SampleSet::new(
            format!("stieltjes_{}", t.name()),
            s.iter().map(|x| x.value_stieltjes).collect(),
        ));
        samples.push(SampleSet::new(
            format!("ito_{}", t.name()),
            s.iter().map(|x| x.value_ito).collect(),
        ));
        samples.push(SampleSet::new(
            format!("symmetry_direct_{}", t.name()),
            r.symmetry.0[j].clone(),
        ));
        samples.push(SampleSet::new(
            format!("symmetry_reflected_{}", t.name()),
            r.symmetry.1[j].clone(),
        ));
    }
    let verdict = Verdict::from_checks(&r.checks);
    let mut out = finish(Command::VerifyIdentities, cfg, verdict, r.checks, r.details, samples);
    for (j, t) in DictionaryTarget::ALL.iter().enumerate() {
        out.files.push((
            format!("theta_triples_{}.csv", t.name()),
            theta_samples_csv(&r.default_samples[j]),
        ));
    }
    Ok(out)
}

fn run_lemma_bounds(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let r = verify::lemma_bounds(cfg)?;
    let verdict = Verdict::from_checks(&r.checks);
    let details = json!({ "reports": r.reports, "truncation_h": r.h_reports });
    let samples = r.samples.into_iter().map(|(n, v)| SampleSet::new(n, v)).collect();
    Ok(finish(Command::LemmaBounds, cfg, verdict, r.checks, details, samples))
}

fn run_annealed_limit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let disc = cfg.discretization();
    let a = annealed::annealed_limit_check(&cfg.n_schedule, cfg.replicas, cfg.path_seed, cfg.scenery_law, disc)?;
    let s = annealed::scaling_identity_check(cfg.scaling_time, cfg.replicas, cfg.path_seed, disc)?;
    let checks = vec![
        Check::at_most("annealed_final_ks", a.final_ks, 0.05),
        {
            let mut c = Check::at_most(
                "annealed_nonincreasing",
                a.ks.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max),
                a.noise,
            );
            c.passed = a.nonincreasing_within_noise;
            c
        },
        Check::at_most("scaling_identity_ks", s.ks, 0.05),
    ];
    let mut samples = vec![SampleSet::new("limit_z1", a.limit_samples.clone())];
    for (n, v) in a.n_schedule.iter().zip(&a.walk_samples) {
        samples.push(SampleSet::new(format!("walk_n{n}"), v.clone()));
    }
    samples.push(SampleSet::new("scaling_direct", s.direct.clone()));
    samples.push(SampleSet::new("scaling_rescaled", s.rescaled.clone()));
    let verdict = Verdict::from_checks(&checks);
    Ok(finish(
        Command::AnnealedLimit,
        cfg,
        verdict,
        checks,
        json!({ "annealed": a, "scaling": s }),
        samples,
    ))
}

fn law_details(l: &MatchedLaw) -> serde_json::Value {
    json!({
        "target": l.target,
        "lambda": l.point.lambda,
        "time": l.point.time,
        "sup_distance": l.point.match_sup_distance,
        "kappa": l.kappa,
        "a_w": l.a_w,
        "l1_distance": l.l1_distance,
        "budget": l.budget,
        "within_budget": l.within_budget,
        "w1_to_theta": l.w1_to_theta,
        "ks_to_theta": l.ks_to_theta,
    })
}

fn law_samples(prefix: &str, laws: &[MatchedLaw]) -> Vec<SampleSet> {
    let mut out = Vec::new();
    for (k, l) in laws.iter().enumerate() {
        let tag = format!("{prefix}{}_{k}", l.target.name());
        out.push(SampleSet::new(
            format!("quenched_{tag}"),
            l.h_samples.iter().map(|h| -l.kappa * h).collect(),
        ));
        out.push(SampleSet::new(format!("theta_{tag}"), l.theta_samples.clone()));
    }
    out
}

fn run_quenched_scan(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let scenery = ContinuumScenery::new(cfg.scenery_seed);
    let (matches, laws) = matched_laws(&scenery, &cfg.targets, cfg, LAWS_PER_TARGET)?;
    let checks: Vec<Check> = laws
        .iter()
        .map(|l| {
            Check::at_most(
                format!("l1_budget_{}_lambda{:.4}", l.target.name(), l.point.lambda),
                l.l1_distance,
                l.budget,
            )
        })
        .collect();
    let verdict = if laws.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::from_checks(&checks)
    };
    let details = json!({
        "matches": matches,
        "laws": laws.iter().map(law_details).collect::<Vec<_>>(),
    });
    Ok(finish(
        Command::QuenchedScan,
        cfg,
        verdict,
        checks,
        details,
        law_samples("", &laws),
    ))
}

fn report_details(seed: u64, r: &NonconvergenceReport) -> serde_json::Value {
    json!({
        "scenery_seed": seed,
        "matches": r.matches,
        "laws": r.laws.iter().map(law_details).collect::<Vec<_>>(),
        "ks_matrix": r.ks_matrix,
        "max_cross_ks": r.max_cross_ks,
        "separation_threshold": r.separation_threshold,
        "all_within_budget": r.all_within_budget,
        "conclusive": r.conclusive,
        "separated": r.separated,
        "verdict": r.verdict,
    })
}

/// Scenery seeds tried after an inconclusive primary run.
pub fn scan_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (1..=cfg.scan_seeds).map(|k| cfg.scenery_seed.wrapping_add(k)).collect()
}

fn run_nonconvergence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let primary = nonconvergence_report(&ContinuumScenery::new(cfg.scenery_seed), &cfg.targets, cfg)?;
    let mut samples = law_samples("", &primary.laws);
    let mut checks = Vec::new();
    let mut scanned = Vec::new();
    let verdict = if primary.conclusive {
        checks.push(Check::at_least(
            "max_cross_ks",
            primary.max_cross_ks.unwrap_or(0.0),
            cfg.separation_threshold,
        ));
        let mut c = Check::at_most("laws_within_budget", 0.0, 0.0);
        c.passed = primary.all_within_budget;
        checks.push(c);
        primary.verdict
    } else {
        let mut conclusive = 0usize;
        let mut refuted = 0usize;
        for seed in scan_seeds(cfg) {
            let r = nonconvergence_report(&ContinuumScenery::new(seed), &cfg.targets, cfg)?;
            if r.conclusive {
                conclusive += 1;
                refuted += usize::from(r.verdict == Verdict::Fail);
                samples.extend(law_samples(&format!("seed{seed}_"), &r.laws));
            }
            scanned.push(report_details(seed, &r));
        }
        let needed = cfg.scan_seeds.div_ceil(2) as f64;
        checks.push(Check::at_least("conclusive_seeds", conclusive as f64, needed));
        checks.push(Check::at_most("conclusive_without_separation", refuted as f64, 0.0));
        if refuted > 0 {
            Verdict::Fail
        } else if (conclusive as f64) < needed {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    };
    let details = json!({
        "primary": report_details(cfg.scenery_seed, &primary),
        "scan": scanned,
    });
    Ok(finish(
        Command::NonconvergenceReport,
        cfg,
        verdict,
        checks,
        details,
        samples,
    ))
}

fn run_theta_sample(cfg: &ExperimentConfig) -> Result<RunOutput> {
    use rayon::prelude::*;
    let disc = cfg.discretization();
    let functions: Vec<_> = cfg.targets.iter().map(|t| t.function()).collect();
    let rows = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let s = path_seed(cfg.path_seed, i);
            let (path, grid) = unit_path(s, disc)?;
            Ok(functions
                .iter()
                .map(|f| theta_sample_on(f, s, &path, &grid))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut files = Vec::new();
    let mut details = serde_json::Map::new();
    for (j, t) in cfg.targets.iter().enumerate() {
        let col: Vec<_> = rows.iter().map(|r| r[j]).collect();
        let occ: Vec<f64> = col.iter().map(|s| s.value_occupation).collect();
        details.insert(
            t.name().into(),
            json!({ "mean": crate::stats::mean(&occ), "n": occ.len() }),
        );
        files.push((format!("theta_triples_{}.csv", t.name()), theta_samples_csv(&col)));
        samples.push(SampleSet::new(format!("theta_{}", t.name()), occ));
    }
    let mut out = finish(
        Command::ThetaSample,
        cfg,
        Verdict::Pass,
        Vec::new(),
        serde_json::Value::Object(details),
        samples,
    );
    out.files = files;
    Ok(out)
}
