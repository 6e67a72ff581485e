//! Acceptance suite. Runs every criterion at its default settings, prints one
//! `criterion N: PASS|FAIL` line each and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rwrs_core::experiments::annealed::{annealed_limit_check, scaling_identity_check};
use rwrs_core::experiments::output::{read_summary, read_values_csv};
use rwrs_core::experiments::quenched::matched_laws;
use rwrs_core::experiments::verify::{lemma_bounds, verify_identities};
use rwrs_core::experiments::{self, Check, Command, ExperimentConfig, Verdict};
use rwrs_core::sampler::ContinuumScenery;
use rwrs_core::strassen::DictionaryTarget;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn failing(checks: &[&Check]) -> String {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}={:.4} vs {:.4}", c.name, c.value, c.threshold))
        .collect::<Vec<_>>()
        .join(", ")
}

fn select<'a>(checks: &'a [Check], prefixes: &[&str]) -> Vec<&'a Check> {
    checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect()
}

fn from_checks(checks: &[&Check], expected: usize, summary: String) -> Outcome {
    if checks.len() != expected {
        return outcome(false, format!("expected {expected} checks, found {}", checks.len()));
    }
    if checks.iter().all(|c| c.passed) {
        outcome(true, summary)
    } else {
        outcome(false, failing(checks))
    }
}

fn worst(checks: &[&Check]) -> f64 {
    checks.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
}

fn estimator_agreement_and_cauchy_schwarz(cfg: &ExperimentConfig) -> (Outcome, Outcome) {
    let run = match verify_identities(cfg) {
        Ok(r) => r,
        Err(e) => return (outcome(false, e.to_string()), outcome(false, e.to_string())),
    };
    let agreement = select(
        &run.checks,
        &["median_discrepancy_", "p95_discrepancy_", "halved_median_"],
    );
    let medians = select(&run.checks, &["median_discrepancy_"]);
    let p95 = select(&run.checks, &["p95_discrepancy_"]);
    let first = from_checks(
        &agreement,
        15,
        format!(
            "max median {:.4} <= 0.02, max p95 {:.4} <= 0.1, halving reduces every median",
            worst(&medians),
            worst(&p95)
        ),
    );
    let cs = select(&run.checks, &["cauchy_schwarz_"]);
    let second = from_checks(
        &cs,
        5,
        format!("max value^2 - sup L over all samples {:.4} <= 0.05", worst(&cs)),
    );
    (first, second)
}

fn lemma(cfg: &ExperimentConfig) -> (Outcome, Outcome) {
    let run = match lemma_bounds(cfg) {
        Ok(r) => r,
        Err(e) => return (outcome(false, e.to_string()), outcome(false, e.to_string())),
    };
    let second = select(&run.checks, &["second_moment_"]);
    let ratio = second.iter().map(|c| c.value / c.threshold).fold(0.0, f64::max);
    let first = from_checks(&second, 5, format!("99% upper bound / 16 s(f) at most {ratio:.3}"));
    let trunc = select(&run.checks, &["truncation_f_", "decay_ratio_"]);
    let decay = select(&run.checks, &["decay_ratio_"]);
    let expected = 5 * cfg.truncation_radii.len() + 5;
    let second = from_checks(
        &trunc,
        expected,
        format!(
            "all tails within bound, max decay ratio n=3/n=1 {:.4} <= {:.4}",
            worst(&decay),
            decay[0].threshold
        ),
    );
    (first, second)
}

fn annealed(cfg: &ExperimentConfig) -> Outcome {
    match annealed_limit_check(
        &cfg.n_schedule,
        cfg.replicas,
        cfg.path_seed,
        cfg.scenery_law,
        cfg.discretization(),
    ) {
        Ok(a) => outcome(
            a.final_ks <= 0.05 && a.nonincreasing_within_noise,
            format!(
                "KS over n={:?}: {:?}; final {:.4} <= 0.05",
                a.n_schedule, a.ks, a.final_ks
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn scaling(cfg: &ExperimentConfig) -> Outcome {
    match scaling_identity_check(cfg.scaling_time, cfg.replicas, cfg.path_seed, cfg.discretization()) {
        Ok(s) => outcome(
            s.ks <= 0.05,
            format!("KS direct vs rescaled at t={} is {:.4} <= 0.05", cfg.scaling_time, s.ks),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn matched_budget(cfg: &ExperimentConfig) -> Outcome {
    let scenery = ContinuumScenery::new(cfg.scenery_seed);
    let laws = match matched_laws(&scenery, &DictionaryTarget::ALL, cfg, usize::MAX) {
        Ok((_, laws)) => laws,
        Err(e) => return outcome(false, e.to_string()),
    };
    if laws.is_empty() {
        return outcome(
            false,
            format!("no match for any target with scenery seed {}", cfg.scenery_seed),
        );
    }
    let bad: Vec<String> = laws
        .iter()
        .filter(|l| l.l1_distance > l.budget)
        .map(|l| {
            format!(
                "{} at lambda {:.3}: {:.4} > {:.4}",
                l.target.name(),
                l.point.lambda,
                l.l1_distance,
                l.budget
            )
        })
        .collect();
    let tightest = laws.iter().map(|l| l.l1_distance / l.budget).fold(0.0, f64::max);
    if bad.is_empty() {
        outcome(true, format!("{} matches, max L1 / budget {tightest:.3}", laws.len()))
    } else {
        outcome(false, bad.join(", "))
    }
}

fn nonconvergence(cfg: &ExperimentConfig) -> Outcome {
    let out = match experiments::run(Command::NonconvergenceReport, cfg) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let detail = out
        .summary
        .checks
        .iter()
        .map(|c| format!("{}={} ({} {})", c.name, c.value, c.direction, c.threshold))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        out.verdict() == Verdict::Pass,
        format!("verdict {:?}; {detail}", out.verdict()),
    )
}

/// Reduced sizes keep this criterion fast. Replay must reproduce the samples
/// at any size.
fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        replicas: 200,
        verify_paths: 100,
        symmetry_paths: 200,
        lemma_paths: 200,
        n_schedule: vec![256, 1024],
        scan_seeds: 3,
        dt: 1e-3,
        ..ExperimentConfig::default()
    }
}

fn determinism() -> Outcome {
    let root = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut compared = 0usize;
    for command in Command::ALL {
        let first_dir = root.path().join(command.name()).join("first");
        let replay_dir = root.path().join(command.name()).join("replay");
        let result = (|| -> rwrs_core::Result<Option<String>> {
            let cfg = ExperimentConfig {
                out_dir: first_dir.clone(),
                ..small_config()
            };
            let mut first = experiments::run(command, &cfg)?;
            let summary_path = first.write(&first_dir)?;
            let mut again = experiments::replay(&read_summary(&summary_path)?)?;
            again.write(&replay_dir)?;
            if again.summary != first.summary {
                return Ok(Some(format!("{}: summaries differ", command.name())));
            }
            for file in &first.summary.sample_files {
                let a = read_values_csv(&std::fs::read_to_string(first_dir.join(file))?)?;
                let b = read_values_csv(&std::fs::read_to_string(replay_dir.join(file))?)?;
                let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
                if !same {
                    return Ok(Some(format!("{}: {file} differs", command.name())));
                }
                compared += a.len();
            }
            Ok(None)
        })();
        match result {
            Ok(None) => {}
            Ok(Some(msg)) => return outcome(false, msg),
            Err(e) => return outcome(false, format!("{}: {e}", command.name())),
        }
    }
    outcome(
        true,
        format!(
            "all {} commands replayed, {compared} samples bit-identical",
            Command::ALL.len()
        ),
    )
}

fn line(n: u32, name: &str, secs: f64, o: &Outcome) -> bool {
    println!(
        "criterion {n}: {} {name} [{secs:.1}s] {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.detail
    );
    o.passed
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default();
    let mut passed = Vec::new();

    let start = Instant::now();
    let (c1, c2) = estimator_agreement_and_cauchy_schwarz(&cfg);
    let secs = start.elapsed().as_secs_f64();
    passed.push(line(1, "estimator agreement", secs, &c1));
    passed.push(line(2, "per-path Cauchy-Schwarz", secs, &c2));

    let start = Instant::now();
    let (c3, c4) = lemma(&cfg);
    let secs = start.elapsed().as_secs_f64();
    passed.push(line(3, "second-moment bound", secs, &c3));
    passed.push(line(4, "truncation decay", secs, &c4));

    let rest: [(u32, &str, &dyn Fn() -> Outcome); 5] = [
        (5, "annealed limit", &|| annealed(&cfg)),
        (6, "scaling identity", &|| scaling(&cfg)),
        (7, "L1 budget at matched times", &|| matched_budget(&cfg)),
        (8, "quenched non-convergence", &|| nonconvergence(&cfg)),
        (9, "replay determinism", &determinism),
    ];
    for (n, name, f) in rest {
        let start = Instant::now();
        let o = f();
        passed.push(line(n, name, start.elapsed().as_secs_f64(), &o));
    }

    let ok = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {ok} of {} criteria passed", passed.len());
    if ok == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
