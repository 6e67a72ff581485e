//! Piecewise-linear members of the Strassen class, LIL-rescaled sceneries and
//! the distances between them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rwrs::LOGLOG_THRESHOLD;
use crate::sampler::{level_for_spacing, QuenchedField, SceneryProfile};

/// Continuous piecewise-linear function, constant outside its knot range.
///
/// The derivative is a step function; at a knot it takes the slope of the
/// segment to the right.
#[derive(Debug, Clone, PartialEq)]
pub struct StrassenFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// `int_{x_0}^{x_j} f`, for the exact antiderivative.
    cumulative: Vec<f64>,
}

impl StrassenFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(invalid("knots and values must be nonempty and of equal length"));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("knots and values must be finite"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("knots must be strictly increasing"));
        }
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        for j in 1..knots.len() {
            let area = 0.5 * (values[j] + values[j - 1]) * (knots[j] - knots[j - 1]);
            cumulative.push(cumulative[j - 1] + area);
        }
        Ok(Self {
            knots,
            values,
            cumulative,
        })
    }

    /// `f = 0`.
    pub fn zero() -> Self {
        Self::new(vec![0.0], vec![0.0]).unwrap()
    }

    /// `f = c` everywhere. Not a member of the Strassen class unless `c = 0`.
    pub fn constant(c: f64) -> Self {
        Self::new(vec![0.0], vec![c]).unwrap()
    }

    /// `min(x^+, 1)`, energy 1.
    pub fn tent_ramp() -> Self {
        Self::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_level(&self) -> f64 {
        self.values[0]
    }

    pub fn right_level(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Index `j` of the segment `[x_j, x_{j+1})` containing `x`, if any.
    fn segment(&self, x: f64) -> Option<usize> {
        let m = self.knots.len();
        if m < 2 || x < self.knots[0] || x >= self.knots[m - 1] {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= x) - 1)
    }

    fn slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) / (self.knots[j + 1] - self.knots[j])
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(j) => self.values[j] + self.slope(j) * (x - self.knots[j]),
            None if x < self.knots[0] => self.left_level(),
            None => self.right_level(),
        }
    }

    /// Right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |j| self.slope(j))
    }

    fn integral_from_first_knot(&self, x: f64) -> f64 {
        let x0 = self.knots[0];
        if x < x0 {
            return self.left_level() * (x - x0);
        }
        match self.segment(x) {
            Some(j) => {
                let fx = self.eval(x);
                self.cumulative[j] + 0.5 * (self.values[j] + fx) * (x - self.knots[j])
            }
            None => {
                let last = self.knots.len() - 1;
                self.cumulative[last] + self.right_level() * (x - self.knots[last])
            }
        }
    }

    /// `F(x) = int_0^x f(u) du`, exact.
    pub fn antiderivative(&self, x: f64) -> f64 {
        self.integral_from_first_knot(x) - self.integral_from_first_knot(0.0)
    }

    /// Pieces `(a, b, f(a), f(b))` of the knot range, in order.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (k[0], k[1], v[0], v[1]))
    }

    pub fn negated(&self) -> Self {
        Self::new(self.knots.clone(), self.values.iter().map(|v| -v).collect()).unwrap()
    }

    /// `x -> f(-x)`.
    pub fn reflected(&self) -> Self {
        let knots = self.knots.iter().rev().map(|k| -k).collect();
        let values = self.values.iter().rev().copied().collect();
        Self::new(knots, values).unwrap()
    }

    /// Inserts a knot without changing the function.
    pub fn with_knot(&self, x: f64) -> Self {
        if self.knots.contains(&x) {
            return self.clone();
        }
        let mut pairs: Vec<(f64, f64)> = self.knots.iter().copied().zip(self.values.iter().copied()).collect();
        pairs.push((x, self.eval(x)));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (knots, values) = pairs.into_iter().unzip();
        Self::new(knots, values).unwrap()
    }

    /// Serializes as CSV: a `left_level,right_level` header row and its values,
    /// then `knot,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("left_level,right_level\n");
        let _ = writeln!(out, "{},{}", self.left_level(), self.right_level());
        out.push_str("knot,value\n");
        for (k, v) in self.knots.iter().zip(&self.values) {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let parse_pair = |line: Option<&str>| -> Result<(f64, f64)> {
            let line = line.ok_or_else(|| Error::Parse("truncated function CSV".into()))?;
            let mut it = line.split(',').map(|s| s.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(Error::Parse(format!("expected two numbers, got `{line}`"))),
            }
        };
        if lines.next() != Some("left_level,right_level") {
            return Err(Error::Parse("missing `left_level,right_level` header".into()));
        }
        let (left, right) = parse_pair(lines.next())?;
        if lines.next() != Some("knot,value") {
            return Err(Error::Parse("missing `knot,value` header".into()));
        }
        let (knots, values): (Vec<f64>, Vec<f64>) = lines
            .map(|l| parse_pair(Some(l)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let f = Self::new(knots, values)?;
        if f.left_level() != left || f.right_level() != right {
            return Err(Error::Parse("outside levels must match the end knot values".into()));
        }
        Ok(f)
    }
}

/// Dirichlet energy `int f'(x)^2 dx`, exact.
pub fn energy(f: &StrassenFunction) -> f64 {
    f.segments().map(|(a, b, fa, fb)| (fb - fa) * (fb - fa) / (b - a)).sum()
}

/// Membership in the Strassen class: `f(0) = 0` and energy at most `1 + tol`.
pub fn is_in_kstar(f: &StrassenFunction, tol: f64) -> bool {
    f.eval(0.0) == 0.0 && energy(f) <= 1.0 + tol
}

/// `f` on `[-n, n]`, held constant at `f(-n)` and `f(n)` outside.
pub fn extend_constant(f: &StrassenFunction, n: f64) -> StrassenFunction {
    let (lo, hi) = (-n.abs(), n.abs());
    let clipped = f.with_knot(lo).with_knot(hi);
    let (knots, values) = clipped
        .knots
        .iter()
        .zip(&clipped.values)
        .filter(|(k, _)| **k >= lo && **k <= hi)
        .map(|(k, v)| (*k, *v))
        .unzip();
    StrassenFunction::new(knots, values).unwrap()
}

/// Named targets shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryTarget {
    Zero,
    TentRamp,
    NegTentRamp,
    /// Two symmetric bumps of height `8^{-1/2}` on `[-1, 0]` and `[0, 1]`.
    SymmetricHat,
    /// `x / 2` clipped to `[-1/2, 1/2]`.
    TwoSidedRamp,
}

impl DictionaryTarget {
    pub const ALL: [Self; 5] = [
        Self::Zero,
        Self::TentRamp,
        Self::NegTentRamp,
        Self::SymmetricHat,
        Self::TwoSidedRamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::TentRamp => "tent_ramp",
            Self::NegTentRamp => "neg_tent_ramp",
            Self::SymmetricHat => "symmetric_hat",
            Self::TwoSidedRamp => "two_sided_ramp",
        }
    }

    pub fn function(self) -> StrassenFunction {
        match self {
            Self::Zero => StrassenFunction::zero(),
            Self::TentRamp => StrassenFunction::tent_ramp(),
            Self::NegTentRamp => StrassenFunction::tent_ramp().negated(),
            Self::SymmetricHat => {
                let a = 0.125f64.sqrt();
                StrassenFunction::new(vec![-1.0, -0.5, 0.0, 0.5, 1.0], vec![0.0, a, 0.0, a, 0.0]).unwrap()
            }
            Self::TwoSidedRamp => StrassenFunction::new(vec![-1.0, 0.0, 1.0], vec![-0.5, 0.0, 0.5]).unwrap(),
        }
    }
}

impl std::str::FromStr for DictionaryTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown dictionary target `{s}`")))
    }
}

/// `W_lambda(t) = W(lambda t) / (2 lambda ln ln lambda)^{1/2}` sampled at
/// `t_k = k * step` for the `k` with `t_k` in the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledProfile {
    pub lambda: f64,
    pub window: (f64, f64),
    pub step: f64,
    first_index: i64,
    samples: Vec<f64>,
}

impl RescaledProfile {
    /// Samples `value(t)` on the grid of a window.
    pub fn from_fn(lambda: f64, window: (f64, f64), step: f64, value: impl Fn(f64) -> f64) -> Result<Self> {
        let (s, r) = window;
        if !(s < 0.0 && r > 0.0) {
            return Err(invalid(format!("window must satisfy s < 0 < r, got [{s}, {r}]")));
        }
        if !(step > 0.0) {
            return Err(invalid("profile step must be positive"));
        }
        let first_index = (s / step - 1e-9).ceil() as i64;
        let last_index = (r / step + 1e-9).floor() as i64;
        let samples = (first_index..=last_index).map(|k| value(k as f64 * step)).collect();
        Ok(Self {
            lambda,
            window,
            step,
            first_index,
            samples,
        })
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.first_index..=self.first_index + self.samples.len() as i64 - 1
    }

    pub fn t(&self, k: i64) -> f64 {
        k as f64 * self.step
    }

    pub fn at_index(&self, k: i64) -> Option<f64> {
        let i = k - self.first_index;
        (i >= 0 && (i as usize) < self.samples.len()).then(|| self.samples[i as usize])
    }

    /// `(t, W_lambda(t))` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.indices().zip(&self.samples).map(|(k, &v)| (self.t(k), v))
    }
}

fn lil_scale(lambda: f64) -> Result<f64> {
    if lambda > LOGLOG_THRESHOLD {
        Ok((2.0 * lambda * lambda.ln().ln()).sqrt())
    } else {
        Err(Error::BelowLogLogDomain(lambda))
    }
}

/// Samples `W_lambda` on a window. The dyadic level is chosen so that the
/// scenery spacing is at most `lambda * step / 64`, and never coarser than
/// `min_level`.
pub fn rescale_profile(
    scenery: &dyn SceneryProfile,
    lambda: f64,
    window: (f64, f64),
    step: f64,
    min_level: i32,
) -> Result<RescaledProfile> {
    let scale = lil_scale(lambda)?;
    let level = level_for_spacing(lambda * step).max(min_level);
    RescaledProfile::from_fn(lambda, window, step, |t| scenery.value(lambda * t, level) / scale)
}

pub fn rescale_profile_field(
    field: &QuenchedField,
    lambda: f64,
    window: (f64, f64),
    step: f64,
) -> Result<RescaledProfile> {
    rescale_profile(&field.as_continuum()?, lambda, window, step, field.resolution)
}

/// Anything that yields a rescaled profile at a given `lambda`.
pub trait ProfileSource: Sync {
    fn rescaled(&self, lambda: f64, window: (f64, f64), step: f64) -> Result<RescaledProfile>;
}

impl<P: SceneryProfile> ProfileSource for P {
    fn rescaled(&self, lambda: f64, window: (f64, f64), step: f64) -> Result<RescaledProfile> {
        rescale_profile(self, lambda, window, step, i32::MIN)
    }
}

/// A control whose rescaled profile is the same function at every `lambda`.
#[derive(Debug, Clone)]
pub struct FrozenProfile(pub StrassenFunction);

impl ProfileSource for FrozenProfile {
    fn rescaled(&self, lambda: f64, window: (f64, f64), step: f64) -> Result<RescaledProfile> {
        lil_scale(lambda)?;
        RescaledProfile::from_fn(lambda, window, step, |t| self.0.eval(t))
    }
}

/// `max_k |W_lambda(t_k) - f(t_k)|` over the profile grid.
pub fn sup_distance(profile: &RescaledProfile, f: &StrassenFunction) -> f64 {
    profile.points().map(|(t, w)| (w - f.eval(t)).abs()).fold(0.0, f64::max)
}

/// `max_{t != 0} |W_lambda(t)| / (|t| ln ln(|t| + 1/|t| + 36))^{1/2}` over the
/// profile grid, the empirical uniform-LIL constant.
pub fn uniform_lil_statistic(profile: &RescaledProfile) -> f64 {
    profile
        .points()
        .filter(|&(t, _)| t != 0.0)
        .map(|(t, w)| {
            let a = t.abs();
            w.abs() / (a * (a + 1.0 / a + 36.0).ln().ln()).sqrt()
        })
        .fold(0.0, f64::max)
}
