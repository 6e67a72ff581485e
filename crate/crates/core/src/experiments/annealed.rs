//! Annealed checks: `n^{-3/4} K_n` against `Z_1`, and the Brownian scaling
//! identity for `Z_t / t^{3/4}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::local_time::{bm_local_time, pair_with_increments, walk_local_time};
use crate::rng::split;
use crate::rwrs::{compute_k_local_time, compute_z};
use crate::sampler::{
    level_for_spacing, simulate_bm, simulate_srw, ContinuumScenery, DiscreteScenery, SceneryLaw, SceneryProfile,
    SiteScenery,
};
use crate::stats::{ks_distance, wasserstein1, EmpiricalDistribution};
use crate::theta::Discretization;

const WALK_TAG: u64 = 0x5741_4C4B;
const LIMIT_TAG: u64 = 0x4C49_4D54;
const DIRECT_TAG: u64 = 0x4449_5245;
const RESCALED_TAG: u64 = 0x5245_5343;

/// `(path seed, scenery seed)` of replica `i` in a stream tagged `tag`.
fn replica_seeds(seed: u64, tag: u64, i: u64) -> (u64, u64) {
    let s = split(split(seed, tag), i);
    (split(s, 1), split(s, 2))
}

/// `n^{-3/4} K_n` over replicas, each with its own walk and scenery.
pub fn annealed_walk_samples<S: SiteScenery>(
    n: usize,
    replicas: usize,
    seed: u64,
    scenery: impl Fn(u64) -> S + Sync,
) -> Vec<f64> {
    let scale = (n as f64).powf(0.75);
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (walk_seed, scenery_seed) = replica_seeds(seed, WALK_TAG ^ n as u64, i);
            let grid = walk_local_time(&simulate_srw(n, walk_seed));
            compute_k_local_time(&grid, &scenery(scenery_seed)) / scale
        })
        .collect()
}

/// `Z_1 = int L_1 dW` over replicas, each with its own `B` and `W`.
pub fn annealed_limit_samples<P: SceneryProfile>(
    replicas: usize,
    seed: u64,
    disc: Discretization,
    scenery: impl Fn(u64) -> P + Sync,
) -> Result<Vec<f64>> {
    let level = level_for_spacing(disc.h);
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (path_seed, scenery_seed) = replica_seeds(seed, LIMIT_TAG, i);
            let grid = bm_local_time(&simulate_bm(1.0, disc.dt, path_seed)?, disc.h)?;
            Ok(compute_z(&grid, &scenery(scenery_seed), level))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealedReport {
    pub n_schedule: Vec<usize>,
    pub replicas: usize,
    pub ks: Vec<f64>,
    pub w1: Vec<f64>,
    pub final_ks: f64,
    /// `ks[i + 1] <= ks[i] + noise` for every consecutive pair.
    pub nonincreasing_within_noise: bool,
    pub noise: f64,
    #[serde(skip)]
    pub walk_samples: Vec<Vec<f64>>,
    #[serde(skip)]
    pub limit_samples: Vec<f64>,
}

/// Two-sample KS noise allowed between consecutive schedule entries.
pub const SCHEDULE_NOISE: f64 = 0.03;

pub fn annealed_distances<S: SiteScenery, P: SceneryProfile>(
    n_schedule: &[usize],
    replicas: usize,
    seed: u64,
    disc: Discretization,
    site_scenery: impl Fn(u64) -> S + Sync,
    profile_scenery: impl Fn(u64) -> P + Sync,
) -> Result<AnnealedReport> {
    if n_schedule.is_empty() || replicas == 0 {
        return Err(invalid("need a nonempty schedule and at least one replica"));
    }
    let limit_samples = annealed_limit_samples(replicas, seed, disc, profile_scenery)?;
    let limit = EmpiricalDistribution::new(limit_samples.clone())?;
    let mut ks = Vec::new();
    let mut w1 = Vec::new();
    let mut walk_samples = Vec::new();
    for &n in n_schedule {
        let samples = annealed_walk_samples(n, replicas, seed, &site_scenery);
        let law = EmpiricalDistribution::new(samples.clone())?;
        ks.push(ks_distance(&law, &limit));
        w1.push(wasserstein1(&law, &limit));
        walk_samples.push(samples);
    }
    Ok(AnnealedReport {
        n_schedule: n_schedule.to_vec(),
        replicas,
        final_ks: *ks.last().unwrap(),
        nonincreasing_within_noise: ks.windows(2).all(|w| w[1] <= w[0] + SCHEDULE_NOISE),
        noise: SCHEDULE_NOISE,
        ks,
        w1,
        walk_samples,
        limit_samples,
    })
}

/// Annealed comparison with fresh sceneries of the given law and fresh
/// continuum sceneries on the limit side.
pub fn annealed_limit_check(
    n_schedule: &[usize],
    replicas: usize,
    seed: u64,
    law: SceneryLaw,
    disc: Discretization,
) -> Result<AnnealedReport> {
    annealed_distances(
        n_schedule,
        replicas,
        seed,
        disc,
        |s| DiscreteScenery::new(s, law),
        ContinuumScenery::new,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub time: f64,
    pub replicas: usize,
    pub ks: f64,
    pub w1: f64,
    #[serde(skip)]
    pub direct: Vec<f64>,
    #[serde(skip)]
    pub rescaled: Vec<f64>,
}

/// Annealed laws of `Z_t / t^{3/4}` built two ways: directly from a path on
/// `[0, t]`, and as `-int t^{-1/4} W(t^{1/2} y) dL_1(y)` from a unit path. Both
/// sides use `1 / dt` time steps and bins of width `h` on their own scale.
pub fn scaling_identity_check(t: f64, replicas: usize, seed: u64, disc: Discretization) -> Result<ScalingReport> {
    if !(t > 0.0) || replicas == 0 {
        return Err(invalid("need t > 0 and at least one replica"));
    }
    let direct_level = level_for_spacing(disc.h);
    let direct = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (path_seed, scenery_seed) = replica_seeds(seed, DIRECT_TAG, i);
            let grid = bm_local_time(&simulate_bm(t, disc.dt * t, path_seed)?, disc.h)?;
            Ok(compute_z(&grid, &ContinuumScenery::new(scenery_seed), direct_level) / t.powf(0.75))
        })
        .collect::<Result<Vec<f64>>>()?;
    let root = t.sqrt();
    let rescaled_level = level_for_spacing(disc.h * root);
    let rescaled = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (path_seed, scenery_seed) = replica_seeds(seed, RESCALED_TAG, i);
            let grid = bm_local_time(&simulate_bm(1.0, disc.dt, path_seed)?, disc.h)?;
            let w = ContinuumScenery::new(scenery_seed);
            // int L dW = -int W dL on a compactly supported L
            Ok(pair_with_increments(&grid, |k| w.value(root * grid.edge(k), rescaled_level)) / t.powf(0.25))
        })
        .collect::<Result<Vec<f64>>>()?;
    let a = EmpiricalDistribution::new(direct.clone())?;
    let b = EmpiricalDistribution::new(rescaled.clone())?;
    Ok(ScalingReport {
        time: t,
        replicas,
        ks: ks_distance(&a, &b),
        w1: wasserstein1(&a, &b),
        direct,
        rescaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::fixed::{ConstantScenery, ZeroProfile};

    #[test]
    fn zero_scenery_gives_point_masses() {
        let r = annealed_distances(
            &[64, 256],
            50,
            3,
            Discretization { dt: 1e-3, h: 0.05 },
            |_| ConstantScenery(0.0),
            |_| ZeroProfile,
        )
        .unwrap();
        assert_eq!(r.ks, vec![0.0, 0.0]);
        assert!(r.nonincreasing_within_noise);
    }

    #[test]
    fn replicas_are_reproducible() {
        let a = annealed_walk_samples(128, 20, 9, |s| DiscreteScenery::new(s, SceneryLaw::Rademacher));
        let b = annealed_walk_samples(128, 20, 9, |s| DiscreteScenery::new(s, SceneryLaw::Rademacher));
        assert_eq!(a, b);
        let c = annealed_walk_samples(128, 20, 10, |s| DiscreteScenery::new(s, SceneryLaw::Rademacher));
        assert_ne!(a, c);
    }
}
