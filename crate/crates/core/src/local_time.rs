//! Local times: exact visit counts for walks, occupation densities for
//! Brownian paths.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sampler::{BrownianPath, WalkPath};

/// A binned local-time profile.
///
/// Bin `k` covers `[k h, (k + 1) h)` and `masses[k - origin_offset]` is the
/// occupation time of that bin divided by `h`. For walks `h = 1` and bin `k`
/// is the site `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeGrid {
    bin_width: f64,
    origin_offset: i64,
    masses: Vec<f64>,
    support_min: f64,
    support_max: f64,
}

impl LocalTimeGrid {
    pub fn new(
        bin_width: f64,
        origin_offset: i64,
        masses: Vec<f64>,
        support_min: f64,
        support_max: f64,
    ) -> Result<Self> {
        if !(bin_width > 0.0) {
            return Err(invalid("bin width must be positive"));
        }
        if masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(invalid("local-time masses must be nonnegative"));
        }
        Ok(Self {
            bin_width,
            origin_offset,
            masses,
            support_min,
            support_max,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn origin_offset(&self) -> i64 {
        self.origin_offset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_min, self.support_max)
    }

    /// First bin index past the stored range.
    pub fn end_bin(&self) -> i64 {
        self.origin_offset + self.masses.len() as i64
    }

    /// Mass of bin `k`; zero outside the stored range.
    pub fn mass(&self, k: i64) -> f64 {
        let i = k - self.origin_offset;
        if i < 0 || i >= self.masses.len() as i64 {
            0.0
        } else {
            self.masses[i as usize]
        }
    }

    /// `(bin index, mass)` pairs in increasing order.
    pub fn bins(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.origin_offset + i as i64, m))
    }

    pub fn bin_of(&self, x: f64) -> i64 {
        (x / self.bin_width).floor() as i64
    }

    pub fn edge(&self, k: i64) -> f64 {
        k as f64 * self.bin_width
    }

    /// `sum mass * h`, the elapsed time of the source path.
    pub fn total_time(&self) -> f64 {
        self.masses.iter().sum::<f64>() * self.bin_width
    }

    /// `sum mass^2 * h`, the discrete analogue of the self-intersection
    /// local time `int L^2 dx`.
    pub fn squared_integral(&self) -> f64 {
        self.masses.iter().map(|m| m * m).sum::<f64>() * self.bin_width
    }
}

/// Visit counts `#{1 <= i <= n : S_i = x}`.
pub fn walk_local_time(path: &WalkPath) -> LocalTimeGrid {
    let visited = &path.positions()[1..];
    let (lo, hi) = match (visited.iter().min(), visited.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => {
            return LocalTimeGrid {
                bin_width: 1.0,
                origin_offset: 0,
                masses: Vec::new(),
                support_min: 0.0,
                support_max: 0.0,
            }
        }
    };
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for &x in visited {
        counts[(x - lo) as usize] += 1;
    }
    LocalTimeGrid {
        bin_width: 1.0,
        origin_offset: lo,
        masses: counts.into_iter().map(|c| c as f64).collect(),
        support_min: lo as f64,
        support_max: hi as f64,
    }
}

/// Occupation-density estimate of the local time of a discretized Brownian
/// path. Each `dt`-interval is attributed to the bin of its left endpoint.
pub fn bm_local_time(path: &BrownianPath, h: f64) -> Result<LocalTimeGrid> {
    if !(h > 0.0) {
        return Err(invalid(format!("bin width must be positive, got {h}")));
    }
    let values = path.values();
    let left = &values[..values.len() - 1];
    let (lo, hi) = path.range();
    let first = (lo / h).floor() as i64;
    let last = (hi / h).floor() as i64;
    let mut masses = vec![0.0; (last - first + 1) as usize];
    let unit = path.dt() / h;
    for &b in left {
        masses[((b / h).floor() as i64 - first) as usize] += unit;
    }
    Ok(LocalTimeGrid {
        bin_width: h,
        origin_offset: first,
        masses,
        support_min: lo,
        support_max: hi,
    })
}

/// `sum_k L(k) (g(k + 1) - g(k))`: the pairing `int L dg` with `L` piecewise
/// constant on the grid and `g` given at bin edges by index.
///
/// Edges are evaluated once each, left to right.
pub fn pair_with_increments(grid: &LocalTimeGrid, mut edge_value: impl FnMut(i64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut left = edge_value(grid.origin_offset);
    for (k, m) in grid.bins() {
        let right = edge_value(k + 1);
        acc += m * (right - left);
        left = right;
    }
    acc
}

/// Largest bin mass, the estimate of `sup_x L(x)`.
pub fn sup_local_time(grid: &LocalTimeGrid) -> f64 {
    grid.masses.iter().copied().fold(0.0, f64::max)
}
