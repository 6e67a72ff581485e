//! Stub sceneries and controls for the matching and non-convergence machinery.

use rwrs_core::experiments::quenched::{find_matching_times, nonconvergence_report};
use rwrs_core::experiments::{ExperimentConfig, Verdict};
use rwrs_core::sampler::fixed::ZeroProfile;
use rwrs_core::sampler::ContinuumScenery;
use rwrs_core::strassen::{DictionaryTarget, FrozenProfile, StrassenFunction};
use rwrs_core::theta::{h_lambda, l1_distance_on_common_paths, unit_path, Discretization};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        replicas: 400,
        dt: 1e-3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn flat_scenery_matches_zero_everywhere_and_pairs_to_zero() {
    let cfg = small();
    let grid = cfg.lambda_grid();
    let zero = StrassenFunction::zero();
    let hits = find_matching_times(&ZeroProfile, &zero, cfg.window, cfg.epsilon, &grid, cfg.profile_step).unwrap();
    assert_eq!(hits, grid);
    let tent = DictionaryTarget::TentRamp.function();
    let none = find_matching_times(&ZeroProfile, &tent, cfg.window, cfg.epsilon, &grid, cfg.profile_step).unwrap();
    assert!(none.is_empty());
    for seed in 0..5 {
        let (path, _) = unit_path(seed, cfg.discretization()).unwrap();
        assert_eq!(h_lambda(&ZeroProfile, grid[0], &path, cfg.h, None).unwrap(), 0.0);
    }
}

#[test]
fn zero_tolerance_matches_nothing() {
    let cfg = small();
    let hits = find_matching_times(
        &ContinuumScenery::new(4),
        &StrassenFunction::zero(),
        cfg.window,
        0.0,
        &cfg.lambda_grid(),
        cfg.profile_step,
    )
    .unwrap();
    assert!(hits.is_empty());
}

#[test]
fn zero_target_is_matched_for_most_seeds() {
    let cfg = ExperimentConfig::default();
    let grid = cfg.lambda_grid();
    let matched = (0..20)
        .filter(|&seed| {
            !find_matching_times(
                &ContinuumScenery::new(seed),
                &StrassenFunction::zero(),
                cfg.window,
                cfg.epsilon,
                &grid,
                cfg.profile_step,
            )
            .unwrap()
            .is_empty()
        })
        .count();
    assert!(matched >= 15, "{matched}");
}

#[test]
fn larger_lambda_budget_never_loses_matches() {
    let cfg = ExperimentConfig::default();
    let zero = StrassenFunction::zero();
    let mut previous = 0;
    for count in [9, 19, 29, 37] {
        let grid = ExperimentConfig {
            lambda_count: count,
            ..cfg.clone()
        }
        .lambda_grid();
        let matched = (0..20)
            .filter(|&seed| {
                !find_matching_times(
                    &ContinuumScenery::new(seed),
                    &zero,
                    cfg.window,
                    cfg.epsilon,
                    &grid,
                    cfg.profile_step,
                )
                .unwrap()
                .is_empty()
            })
            .count();
        assert!(matched >= previous);
        previous = matched;
    }
}

#[test]
fn frozen_profile_pairs_to_its_own_limit() {
    let f = DictionaryTarget::TentRamp.function();
    let d = l1_distance_on_common_paths(&FrozenProfile(f.clone()), 1e4, &f, 400, 3, Discretization::default()).unwrap();
    assert!(d <= 0.02, "{d}");
}

#[test]
fn frozen_scenery_shows_no_separation() {
    // half the symmetric hat lies within 0.4 of both the hat and zero, so both
    // targets match at every lambda while every law is the same
    let hat = DictionaryTarget::SymmetricHat.function();
    let half = StrassenFunction::new(hat.knots().to_vec(), hat.values().iter().map(|v| v / 2.0).collect()).unwrap();
    let cfg = ExperimentConfig {
        targets: vec![DictionaryTarget::Zero, DictionaryTarget::SymmetricHat],
        lambda_count: 3,
        ..small()
    };
    let r = nonconvergence_report(&FrozenProfile(half), &cfg.targets, &cfg).unwrap();
    assert!(r.conclusive);
    assert_eq!(r.max_cross_ks, Some(0.0));
    assert!(!r.separated);
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn single_target_is_inconclusive() {
    let cfg = ExperimentConfig {
        targets: vec![DictionaryTarget::Zero],
        lambda_count: 3,
        ..small()
    };
    let r = nonconvergence_report(&FrozenProfile(StrassenFunction::zero()), &cfg.targets, &cfg).unwrap();
    assert!(!r.conclusive);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.max_cross_ks.is_none());
    assert!(nonconvergence_report(&ZeroProfile, &[], &cfg).is_err());
}
