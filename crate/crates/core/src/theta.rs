//! The limit functional `int f dL_1` and the scenery pairing `H_lambda`.
//!
//! `int f dL_1` is estimated through three channels that are algebraically
//! equal in the continuum and discretize differently:
//!
//! * occupation: `-int_0^1 f'(B_s) ds`, summed over Euler steps;
//! * Stieltjes: `-int L_1(x) f'(x) dx`, against a binned local time;
//! * Ito: `2 (-F(B_1) + int_0^1 f(B_u) dB_u)` with `F` the antiderivative.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::local_time::{bm_local_time, sup_local_time, LocalTimeGrid};
use crate::rng::split;
use crate::sampler::{simulate_bm, BrownianPath};
use crate::stats::EmpiricalDistribution;
use crate::strassen::{ProfileSource, RescaledProfile, StrassenFunction};

/// Time step and local-time bin width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub dt: f64,
    pub h: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { dt: 1e-4, h: 0.02 }
    }
}

impl Discretization {
    pub fn halved(self) -> Self {
        Self {
            dt: self.dt / 2.0,
            h: self.h / 2.0,
        }
    }
}

/// Seed of the `i`-th Brownian path of an experiment.
pub fn path_seed(seed: u64, i: u64) -> u64 {
    split(seed, i)
}

/// A horizon-1 path with its local-time grid.
pub fn unit_path(seed: u64, disc: Discretization) -> Result<(BrownianPath, LocalTimeGrid)> {
    let path = simulate_bm(1.0, disc.dt, seed)?;
    let grid = bm_local_time(&path, disc.h)?;
    Ok((path, grid))
}

/// `-sum_k f'(B_{t_k}) dt`.
pub fn sample_occupation(f: &StrassenFunction, path: &BrownianPath) -> f64 {
    let v = path.values();
    -path.dt() * v[..v.len() - 1].iter().map(|&b| f.derivative(b)).sum::<f64>()
}

/// `-sum_bins L(k) (f(x_{k+1}) - f(x_k))`; the bin increment of `f` is the
/// exact integral of `f'` over the bin.
pub fn sample_stieltjes(f: &StrassenFunction, grid: &LocalTimeGrid) -> f64 {
    integrate_dl(grid, |k| f.eval(grid.edge(k)), Region::All)
}

/// `2 (-F(B_1) + sum_k f(B_{t_k}) (B_{t_{k+1}} - B_{t_k}))`.
pub fn sample_ito(f: &StrassenFunction, path: &BrownianPath) -> f64 {
    let v = path.values();
    let ito: f64 = v.windows(2).map(|w| f.eval(w[0]) * (w[1] - w[0])).sum();
    2.0 * (ito - f.antiderivative(path.end()))
}

/// Part of the real line a Stieltjes integral against `dL` runs over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    All,
    /// `[-n, n]`.
    Within(f64),
    /// `{|x| > n}`.
    Outside(f64),
}

impl Region {
    pub fn truncation(n: Option<f64>) -> Self {
        n.map_or(Self::All, Self::Within)
    }
}

/// `int_region g dL` for `g` known at bin edges, by summation by parts.
///
/// `int_a^b g dL = g(b) L(b) - g(a) L(a) - int_a^b L dg` with `a, b = -n, n`
/// snapped to the nearest bin edges. The local time at a cut is read from
/// the bin just outside the cut, so a path that never crosses `+-n` has no
/// mass outside `[-n, n]`.
pub fn integrate_dl(grid: &LocalTimeGrid, mut g: impl FnMut(i64) -> f64, region: Region) -> f64 {
    let cut = match region {
        Region::All => None,
        Region::Within(n) | Region::Outside(n) => Some((n.abs() / grid.bin_width()).round() as i64),
    };
    let mut full = 0.0;
    let mut inside = 0.0;
    let mut left = g(grid.origin_offset());
    for (k, m) in grid.bins() {
        let right = g(k + 1);
        let term = -m * (right - left);
        full += term;
        if let Some(c) = cut {
            if k >= -c && k < c {
                inside += term;
            }
        }
        left = right;
    }
    let Some(c) = cut else { return full };
    if grid.mass(c) > 0.0 {
        inside += g(c) * grid.mass(c);
    }
    if grid.mass(-c - 1) > 0.0 {
        inside -= g(-c) * grid.mass(-c - 1);
    }
    match region {
        Region::Within(_) => inside,
        _ => full - inside,
    }
}

/// The three estimates of `int f dL_1` on one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub path_seed: u64,
    pub value_occupation: f64,
    pub value_stieltjes: f64,
    pub value_ito: f64,
    pub sup_local_time: f64,
}

impl ThetaSample {
    /// Largest of the three pairwise discrepancies.
    pub fn max_discrepancy(&self) -> f64 {
        let (a, b, c) = (self.value_occupation, self.value_stieltjes, self.value_ito);
        (a - b).abs().max((a - c).abs()).max((b - c).abs())
    }
}

pub fn theta_sample_on(f: &StrassenFunction, seed: u64, path: &BrownianPath, grid: &LocalTimeGrid) -> ThetaSample {
    ThetaSample {
        path_seed: seed,
        value_occupation: sample_occupation(f, path),
        value_stieltjes: sample_stieltjes(f, grid),
        value_ito: sample_ito(f, path),
        sup_local_time: sup_local_time(grid),
    }
}

/// CSV with one `path_seed,occ,stielt,ito` row per sample.
pub fn theta_samples_csv(samples: &[ThetaSample]) -> String {
    let mut out = String::from("path_seed,occ,stielt,ito\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.path_seed, s.value_occupation, s.value_stieltjes, s.value_ito
        );
    }
    out
}

/// Law of `int f dL_1` from the occupation channel over `n_paths`
/// independent paths; path `i` is seeded with [`path_seed`]`(seed, i)`.
pub fn theta_law(
    f: &StrassenFunction,
    n_paths: usize,
    seed: u64,
    disc: Discretization,
) -> Result<EmpiricalDistribution> {
    if n_paths == 0 {
        return Err(invalid("theta_law needs at least one path"));
    }
    let samples = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_bm(1.0, disc.dt, path_seed(seed, i)).map(|p| sample_occupation(f, &p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalDistribution::new(samples)?.with_provenance("theta_law", seed))
}

/// `W_lambda` tabulated at the bin edges `k h` of local-time grids.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    profile: RescaledProfile,
}

/// Half-width of the default edge table. A standard Brownian path on
/// `[0, 1]` leaves `[-8, 8]` with probability below `1e-14`.
pub const EDGE_TABLE_RADIUS: f64 = 8.0;

impl EdgeTable {
    pub fn build(source: &dyn ProfileSource, lambda: f64, h: f64) -> Result<Self> {
        Self::with_radius(source, lambda, h, EDGE_TABLE_RADIUS)
    }

    pub fn with_radius(source: &dyn ProfileSource, lambda: f64, h: f64, radius: f64) -> Result<Self> {
        let profile = source.rescaled(lambda, (-radius, radius), h)?;
        Ok(Self { profile })
    }

    pub fn lambda(&self) -> f64 {
        self.profile.lambda
    }

    pub fn profile(&self) -> &RescaledProfile {
        &self.profile
    }

    fn covers(&self, grid: &LocalTimeGrid) -> bool {
        let idx = self.profile.indices();
        (grid.bin_width() - self.profile.step).abs() <= 1e-12 * grid.bin_width()
            && idx.contains(&grid.origin_offset())
            && idx.contains(&grid.end_bin())
    }

    /// `H_lambda` (region `All`) or its truncations, on one path.
    pub fn pairing(&self, grid: &LocalTimeGrid, region: Region) -> Result<f64> {
        if !self.covers(grid) {
            return Err(invalid("edge table does not cover the local-time grid"));
        }
        Ok(integrate_dl(grid, |k| self.profile.at_index(k).unwrap(), region))
    }
}

/// `H_lambda = int W_lambda dL_1`, or `H_lambda^(n)` over `[-n, n]` when a
/// truncation is given.
pub fn h_lambda(
    source: &dyn ProfileSource,
    lambda: f64,
    path: &BrownianPath,
    h: f64,
    truncation: Option<f64>,
) -> Result<f64> {
    let grid = bm_local_time(path, h)?;
    let (lo, hi) = grid.support();
    let radius = lo.abs().max(hi.abs()) + 2.0 * h;
    let table = EdgeTable::with_radius(source, lambda, h, radius)?;
    table.pairing(&grid, Region::truncation(truncation))
}

/// `(1 / N) sum_i |H_lambda(path_i) - int f dL_1(path_i)|` over shared paths,
/// estimating the `L^1(B)` distance between `H_lambda` and `int f dL_1`.
pub fn l1_distance_on_common_paths(
    source: &dyn ProfileSource,
    lambda: f64,
    f: &StrassenFunction,
    n_paths: usize,
    seed: u64,
    disc: Discretization,
) -> Result<f64> {
    if n_paths == 0 {
        return Err(invalid("need at least one path"));
    }
    let table = EdgeTable::build(source, lambda, disc.h)?;
    let total = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (path, grid) = unit_path(path_seed(seed, i), disc)?;
            Ok((table.pairing(&grid, Region::All)? - sample_occupation(f, &path)).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum::<f64>();
    Ok(total / n_paths as f64)
}
