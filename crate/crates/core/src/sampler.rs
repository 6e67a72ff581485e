//! Walks, Brownian paths and quenched sceneries.
//!
//! Sceneries are never stored. A discrete scenery value at site `x` and a
//! continuum scenery value at a dyadic point are both pure functions of the
//! field seed and the address, so one quenched environment can be re-queried
//! by any number of independent walks, at any range and any resolution.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{path_rng, split, zigzag, KeyedStream};

const WALK_TAG: u64 = 0x5752_574B;
const BM_TAG: u64 = 0x4252_4F57;
const SITE_TAG: u64 = 0x5349_5445;
const BLOCK_TAG: u64 = 0x424C_4F43;
const MIDPOINT_TAG: u64 = 0x4D49_4450;

/// Simple symmetric random walk on Z started at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    positions: Vec<i64>,
}

impl WalkPath {
    /// Builds a path from explicit positions, checking the nearest-neighbour
    /// and start-at-origin constraints.
    pub fn from_positions(positions: Vec<i64>) -> Result<Self> {
        if positions.first() != Some(&0) {
            return Err(invalid("walk must start at 0"));
        }
        if positions.windows(2).any(|w| (w[1] - w[0]).abs() != 1) {
            return Err(invalid("walk increments must be +1 or -1"));
        }
        Ok(Self { positions })
    }

    pub fn steps_count(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn end(&self) -> i64 {
        *self.positions.last().unwrap()
    }
}

/// Draws `n` steps of a simple symmetric random walk.
pub fn simulate_srw(n: usize, seed: u64) -> WalkPath {
    let mut rng = path_rng(seed, WALK_TAG);
    let mut positions = Vec::with_capacity(n + 1);
    positions.push(0i64);
    let mut pos = 0i64;
    let mut bits = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            bits = rng.random::<u64>();
        }
        pos += if bits & 1 == 1 { 1 } else { -1 };
        bits >>= 1;
        positions.push(pos);
    }
    WalkPath { positions }
}

/// Euler discretization of a standard Brownian motion on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    horizon: f64,
    dt: f64,
    values: Vec<f64>,
}

impl BrownianPath {
    /// Wraps explicit samples `values[k] = B(k dt)`; `values[0]` must be 0.
    pub fn from_values(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        if values.first() != Some(&0.0) {
            return Err(invalid("Brownian path must start at 0"));
        }
        let horizon = dt * (values.len() - 1) as f64;
        Ok(Self { horizon, dt, values })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn end(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Running minimum and maximum of the sampled path.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// The path x -> -x, which has the same law.
    pub fn reflected(&self) -> Self {
        Self {
            horizon: self.horizon,
            dt: self.dt,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

/// Number of Euler steps for a horizon, tolerant to `T / dt` landing a hair
/// below an integer in floating point.
pub fn step_count(horizon: f64, dt: f64) -> usize {
    (horizon / dt + 1e-9).floor() as usize
}

pub fn simulate_bm(horizon: f64, dt: f64, seed: u64) -> Result<BrownianPath> {
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt > 0.0) || dt > horizon {
        return Err(invalid(format!("dt must lie in (0, T], got {dt}")));
    }
    let steps = step_count(horizon, dt);
    let mut rng = path_rng(seed, BM_TAG);
    let scale = dt.sqrt();
    let mut values = Vec::with_capacity(steps + 1);
    let mut b = 0.0;
    values.push(b);
    for _ in 0..steps {
        let g: f64 = rng.sample(StandardNormal);
        b += scale * g;
        values.push(b);
    }
    Ok(BrownianPath { horizon, dt, values })
}

/// Marginal law of a discrete scenery site. All are centered with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneryLaw {
    Gaussian,
    Rademacher,
    /// `E - 1` with `E` standard exponential.
    CenteredExponential,
}

impl std::str::FromStr for SceneryLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            "centered_exponential" | "centered_exponentialized" => Ok(Self::CenteredExponential),
            other => Err(Error::Parse(format!("unknown scenery law `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    DiscreteScenery,
    ContinuumScenery,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            Self::DiscreteScenery => "discrete",
            Self::ContinuumScenery => "continuum",
        }
    }
}

/// A reproducible quenched environment: either i.i.d. site values `xi_x` on Z
/// or a two-sided Brownian motion `W` on R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchedField {
    pub seed: u64,
    pub kind: FieldKind,
    pub scenery_law: SceneryLaw,
    /// Default dyadic level for continuum queries.
    pub resolution: i32,
}

impl QuenchedField {
    pub fn discrete(seed: u64, scenery_law: SceneryLaw) -> Self {
        Self {
            seed,
            kind: FieldKind::DiscreteScenery,
            scenery_law,
            resolution: 0,
        }
    }

    pub fn continuum(seed: u64, resolution: i32) -> Self {
        Self {
            seed,
            kind: FieldKind::ContinuumScenery,
            scenery_law: SceneryLaw::Gaussian,
            resolution,
        }
    }

    pub fn as_discrete(&self) -> Result<DiscreteScenery> {
        match self.kind {
            FieldKind::DiscreteScenery => Ok(DiscreteScenery::new(self.seed, self.scenery_law)),
            other => Err(Error::WrongKind {
                expected: FieldKind::DiscreteScenery.name(),
                found: other.name(),
            }),
        }
    }

    pub fn as_continuum(&self) -> Result<ContinuumScenery> {
        match self.kind {
            FieldKind::ContinuumScenery => Ok(ContinuumScenery::new(self.seed)),
            other => Err(Error::WrongKind {
                expected: FieldKind::ContinuumScenery.name(),
                found: other.name(),
            }),
        }
    }

    /// `xi_x` for a discrete field.
    pub fn site_value(&self, x: i64) -> Result<f64> {
        Ok(self.as_discrete()?.site_value(x))
    }

    /// `W(x)` for a continuum field, linearly interpolated between dyadic
    /// points of spacing `2^-level`.
    pub fn continuum_value(&self, x: f64, level: i32) -> Result<f64> {
        Ok(self.as_continuum()?.value(x, level))
    }
}

/// Site values of a discrete scenery.
pub trait SiteScenery: Sync {
    fn site_value(&self, x: i64) -> f64;
}

/// A two-sided real function playing the role of `W`.
///
/// `level` requests dyadic detail down to spacing `2^-level`; profiles that
/// are exact at every point ignore it.
pub trait SceneryProfile: Sync {
    fn value(&self, x: f64, level: i32) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteScenery {
    stream: KeyedStream,
    law: SceneryLaw,
}

impl DiscreteScenery {
    pub fn new(seed: u64, law: SceneryLaw) -> Self {
        Self {
            stream: KeyedStream::tagged(seed, SITE_TAG),
            law,
        }
    }
}

impl SiteScenery for DiscreteScenery {
    #[inline]
    fn site_value(&self, x: i64) -> f64 {
        let c = zigzag(x);
        match self.law {
            SceneryLaw::Gaussian => self.stream.gaussian_at(c),
            SceneryLaw::Rademacher => self.stream.sign_at(c),
            SceneryLaw::CenteredExponential => -self.stream.uniform_at(c).ln() - 1.0,
        }
    }
}

/// log2 of the coarse block length on each half-line.
const BLOCK_LEVEL: i32 = 24;
/// Finest supported level; keeps dyadic coordinates exact in an f64.
pub const MAX_LEVEL: i32 = 28;

/// Two-sided Brownian motion built by Levy midpoint refinement.
///
/// Each half-line is cut into blocks of length `2^24` whose endpoints are a
/// Gaussian random walk. Inside a block, the value at a dyadic midpoint is the
/// average of its parent endpoints plus an independent bridge displacement
/// keyed on the midpoint's address, so a dyadic value is fixed the first time
/// it exists and finer levels only add detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuumScenery {
    seed: u64,
}

impl ContinuumScenery {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn block_endpoint(&self, side: u64, block: u64) -> f64 {
        let stream = KeyedStream::tagged(split(self.seed, side), BLOCK_TAG);
        let scale = ((1u64 << BLOCK_LEVEL) as f64).sqrt();
        (0..block).map(|j| scale * stream.gaussian_at(j)).sum()
    }

    fn half_line(&self, side: u64, u: f64, level: i32) -> f64 {
        let level = level.clamp(-BLOCK_LEVEL, MAX_LEVEL);
        let block_len = (1u64 << BLOCK_LEVEL) as f64;
        let block = (u / block_len).floor() as u64;
        let mut a = block as f64 * block_len;
        let mut len = block_len;
        let mut va = self.block_endpoint(side, block);
        let block_stream = KeyedStream::tagged(split(self.seed, side), BLOCK_TAG);
        let mut vb = va + block_len.sqrt() * block_stream.gaussian_at(block);
        let depth_key = split(split(self.seed, side ^ MIDPOINT_TAG), block);
        for depth in 0..(BLOCK_LEVEL + level) as u64 {
            let half = 0.5 * len;
            let mid = a + half;
            let local = ((mid - block as f64 * block_len) / half) as u64;
            let g = KeyedStream::new(split(depth_key, depth)).gaussian_at(local);
            let vm = 0.5 * (va + vb) + 0.5 * len.sqrt() * g;
            if u < mid {
                vb = vm;
            } else {
                a = mid;
                va = vm;
            }
            len = half;
        }
        va + (vb - va) * (u - a) / len
    }
}

impl SceneryProfile for ContinuumScenery {
    fn value(&self, x: f64, level: i32) -> f64 {
        if x == 0.0 {
            0.0
        } else if x > 0.0 {
            self.half_line(0, x, level)
        } else {
            self.half_line(1, -x, level)
        }
    }
}

/// Dyadic level whose spacing is at most `spacing / 64`.
pub fn level_for_spacing(spacing: f64) -> i32 {
    (64.0 / spacing)
        .log2()
        .ceil()
        .clamp(-(BLOCK_LEVEL as f64), MAX_LEVEL as f64) as i32
}

/// Deterministic sceneries and profiles used as controls.
pub mod fixed {
    use std::collections::BTreeMap;

    use super::{SceneryProfile, SiteScenery};

    /// `xi_x = c` for every site.
    #[derive(Debug, Clone, Copy)]
    pub struct ConstantScenery(pub f64);

    impl SiteScenery for ConstantScenery {
        fn site_value(&self, _x: i64) -> f64 {
            self.0
        }
    }

    /// Explicit site values, zero elsewhere.
    #[derive(Debug, Clone, Default)]
    pub struct TableScenery(pub BTreeMap<i64, f64>);

    impl SiteScenery for TableScenery {
        fn site_value(&self, x: i64) -> f64 {
            self.0.get(&x).copied().unwrap_or(0.0)
        }
    }

    /// `W(x) = slope * x`.
    #[derive(Debug, Clone, Copy)]
    pub struct LinearProfile(pub f64);

    impl SceneryProfile for LinearProfile {
        fn value(&self, x: f64, _level: i32) -> f64 {
            self.0 * x
        }
    }

    /// `W = 0`.
    #[derive(Debug, Clone, Copy)]
    pub struct ZeroProfile;

    impl SceneryProfile for ZeroProfile {
        fn value(&self, _x: f64, _level: i32) -> f64 {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_walk() {
        assert_eq!(simulate_srw(0, 9).positions(), &[0]);
    }

    #[test]
    fn walk_increments_are_unit() {
        let w = simulate_srw(1000, 3);
        assert_eq!(w.steps_count(), 1000);
        assert!(w.positions().windows(2).all(|p| (p[1] - p[0]).abs() == 1));
        assert_eq!(simulate_srw(1000, 3), w);
    }

    #[test]
    fn from_positions_validates() {
        assert!(WalkPath::from_positions(vec![0, 1, 0, -1]).is_ok());
        assert!(WalkPath::from_positions(vec![1, 2]).is_err());
        assert!(WalkPath::from_positions(vec![0, 2]).is_err());
    }

    #[test]
    fn bm_shape_and_errors() {
        let p = simulate_bm(1.0, 1.0, 5).unwrap();
        assert_eq!(p.values().len(), 2);
        assert_eq!(p.values()[0], 0.0);
        let p = simulate_bm(1.0, 1e-4, 5).unwrap();
        assert_eq!(p.values().len(), 10_001);
        assert!(simulate_bm(1.0, 0.0, 1).is_err());
        assert!(simulate_bm(0.0, 0.1, 1).is_err());
        assert!(simulate_bm(1.0, -0.1, 1).is_err());
        assert!(simulate_bm(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let d = QuenchedField::discrete(1, SceneryLaw::Gaussian);
        let c = QuenchedField::continuum(1, 0);
        assert!(matches!(d.continuum_value(0.5, 3), Err(Error::WrongKind { .. })));
        assert!(matches!(c.site_value(3), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn site_values_repeat_and_respect_support() {
        let f = QuenchedField::discrete(11, SceneryLaw::Rademacher);
        for x in -50..50 {
            let v = f.site_value(x).unwrap();
            assert_eq!(v.to_bits(), f.site_value(x).unwrap().to_bits());
            assert!(v == 1.0 || v == -1.0);
        }
        let e = DiscreteScenery::new(11, SceneryLaw::CenteredExponential);
        assert!((-50..50).all(|x| e.site_value(x) > -1.0));
    }

    #[test]
    fn continuum_origin_and_dyadic_consistency() {
        let w = ContinuumScenery::new(77);
        assert_eq!(w.value(0.0, 10), 0.0);
        for &x in &[0.5, 1.0, -3.25, 17.0, 1234.5, -0.125] {
            let coarse = w.value(x, 3);
            for level in 4..20 {
                assert_eq!(coarse.to_bits(), w.value(x, level).to_bits(), "x={x} level={level}");
            }
        }
    }

    #[test]
    fn continuum_interpolates_linearly_between_dyadics() {
        let w = ContinuumScenery::new(5);
        let (a, b) = (w.value(2.0, 0), w.value(3.0, 0));
        assert!((w.value(2.25, 0) - (0.75 * a + 0.25 * b)).abs() < 1e-12);
    }

    #[test]
    fn level_for_spacing_is_fine_enough() {
        for &s in &[0.02, 1.0, 0.4, 3000.0] {
            let l = level_for_spacing(s);
            assert!(2f64.powi(-l) <= s / 64.0 + 1e-15);
        }
    }
}
