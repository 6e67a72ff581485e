//! Empirical distributions, two-sample distances and the percentile bootstrap.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::path_rng;

/// Sorted sample with ECDF and quantile accessors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment: String,
    pub seed: u64,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(invalid("samples must not contain NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self {
            samples,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, experiment: impl Into<String>, seed: u64) -> Self {
        self.provenance = Some(Provenance {
            experiment: experiment.into(),
            seed,
        });
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `#{samples <= x} / n`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Linear-interpolation quantile (type 7).
    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.samples, p)
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }

    /// `value,cdf` rows at every distinct sample value.
    pub fn ecdf_csv(&self) -> String {
        let mut out = String::from("value,cdf\n");
        let n = self.samples.len() as f64;
        for (i, &v) in self.samples.iter().enumerate() {
            if self.samples.get(i + 1) != Some(&v) {
                let _ = writeln!(out, "{v},{}", (i + 1) as f64 / n);
            }
        }
        out
    }

    /// One `value` row per sample.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("value\n");
        for v in &self.samples {
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Merged sweep over the distinct values of two sorted samples, yielding
/// `(value, F_p(value), F_q(value))`.
fn sweep<'a>(p: &'a [f64], q: &'a [f64]) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let (np, nq) = (p.len() as f64, q.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    std::iter::from_fn(move || {
        let v = match (p.get(i), q.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => return None,
        };
        while i < p.len() && p[i] <= v {
            i += 1;
        }
        while j < q.len() && q[j] <= v {
            j += 1;
        }
        Some((v, i as f64 / np, j as f64 / nq))
    })
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_P(x) - F_Q(x)|`.
pub fn ks_distance(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    sweep(&p.samples, &q.samples)
        .map(|(_, a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// `int |F_P - F_Q| dx`, the 1-Wasserstein distance between the empirical laws.
pub fn wasserstein1(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (v, a, b) in sweep(&p.samples, &q.samples) {
        if let Some((x, gap)) = prev {
            total += gap * (v - x);
        }
        prev = Some((v, (a - b).abs()));
    }
    total
}

/// `c(alpha) ((n + m) / (n m))^{1/2}` with `c(alpha) = (-ln(alpha / 2) / 2)^{1/2}`:
/// the asymptotic level-`alpha` critical value of the two-sample KS statistic.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Sorted bootstrap replicates of `statistic`.
pub fn bootstrap_distribution(
    samples: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if resamples < 100 {
        return Err(invalid(format!("need at least 100 resamples, got {resamples}")));
    }
    let mut rng = path_rng(seed, 0x424F_4F54);
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[rng.random_range(0..n)];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

/// Percentile bootstrap confidence interval at `level`.
pub fn bootstrap_ci(
    samples: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("level must lie in (0, 1), got {level}")));
    }
    let stats = bootstrap_distribution(samples, statistic, resamples, seed)?;
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&stats, tail), quantile_sorted(&stats, 1.0 - tail)))
}

/// One-sided percentile bootstrap upper bound at `level`.
pub fn bootstrap_upper(
    samples: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    let stats = bootstrap_distribution(samples, statistic, resamples, seed)?;
    Ok(quantile_sorted(&stats, level))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ks_basics() {
        let p = dist(&[0.3, 0.1, 0.2]);
        assert_eq!(ks_distance(&p, &p), 0.0);
        assert_eq!(ks_distance(&dist(&[0.0]), &dist(&[1.0])), 1.0);
        assert!((ks_distance(&dist(&[0.0, 1.0]), &dist(&[0.0, 0.0])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w1_basics() {
        let p = dist(&[1.0, 5.0, 2.0]);
        assert_eq!(wasserstein1(&p, &p), 0.0);
        assert_eq!(wasserstein1(&dist(&[0.0]), &dist(&[1.0])), 1.0);
        assert_eq!(wasserstein1(&dist(&[0.0, 0.0]), &dist(&[0.0, 2.0])), 1.0);
    }

    #[test]
    fn w1_equal_sizes_is_mean_sorted_gap() {
        let a = dist(&[0.5, -1.0, 3.0, 2.5]);
        let b = dist(&[1.0, 1.0, -2.0, 0.0]);
        let direct: f64 = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / 4.0;
        assert!((wasserstein1(&a, &b) - direct).abs() < 1e-12);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(EmpiricalDistribution::new(vec![]), Err(Error::EmptySample)));
        assert!(bootstrap_ci(&[], mean, 0.9, 200, 1).is_err());
        assert!(bootstrap_ci(&[1.0], mean, 0.9, 99, 1).is_err());
    }

    #[test]
    fn ecdf_and_quantiles() {
        let d = dist(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(d.ecdf(0.0), 0.0);
        assert_eq!(d.ecdf(2.0), 0.75);
        assert_eq!(d.quantile(0.0), 1.0);
        assert_eq!(d.quantile(1.0), 3.0);
        assert_eq!(d.ecdf_csv(), "value,cdf\n1,0.25\n2,0.75\n3,1\n");
    }

    #[test]
    fn bootstrap_constant_and_nesting() {
        assert_eq!(bootstrap_ci(&[2.5; 40], mean, 0.95, 200, 3).unwrap(), (2.5, 2.5));
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let (lo90, hi90) = bootstrap_ci(&xs, mean, 0.9, 1000, 4).unwrap();
        let (lo99, hi99) = bootstrap_ci(&xs, mean, 0.99, 1000, 4).unwrap();
        assert!(lo99 <= lo90 && hi90 <= hi99);
        assert_eq!(bootstrap_ci(&xs, mean, 0.9, 1000, 4).unwrap(), (lo90, hi90));
    }

    #[test]
    fn critical_value_matches_table() {
        // c(0.01) = 1.6276
        let v = ks_critical_value(10_000, 10_000, 0.01);
        assert!((v - 1.6276 * (2.0f64 / 10_000.0).sqrt()).abs() < 1e-4);
    }
}
