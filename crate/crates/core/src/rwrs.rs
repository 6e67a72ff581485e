//! The scenery sums `K_n`, `Z_t` and their iterated-logarithm rescaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_time::{pair_with_increments, LocalTimeGrid};
use crate::sampler::{level_for_spacing, QuenchedField, SceneryProfile, SiteScenery, WalkPath};

/// `e^e`, below which `ln ln t` is not positive.
pub const LOGLOG_THRESHOLD: f64 = 15.154_262_241_479_262;

/// `K_n = sum_{i=1}^n xi_{S_i}`, summed along the path.
pub fn compute_k(path: &WalkPath, scenery: &impl SiteScenery) -> f64 {
    path.positions()[1..].iter().map(|&x| scenery.site_value(x)).sum()
}

/// `K_n = sum_x xi_x l_n(x)` from a walk local-time grid.
pub fn compute_k_local_time(grid: &LocalTimeGrid, scenery: &impl SiteScenery) -> f64 {
    grid.bins().map(|(x, count)| count * scenery.site_value(x)).sum()
}

pub fn compute_k_field(path: &WalkPath, field: &QuenchedField) -> Result<f64> {
    Ok(compute_k(path, &field.as_discrete()?))
}

/// `Z = int L dW` as the Riemann-Stieltjes sum `sum_k L(k) (W(x_{k+1}) - W(x_k))`.
pub fn compute_z(grid: &LocalTimeGrid, scenery: &dyn SceneryProfile, level: i32) -> f64 {
    pair_with_increments(grid, |k| scenery.value(grid.edge(k), level))
}

/// [`compute_z`] on a continuum field, at a dyadic level fine enough for the
/// grid's bin width.
pub fn compute_z_field(grid: &LocalTimeGrid, field: &QuenchedField) -> Result<f64> {
    let w = field.as_continuum()?;
    let level = field.resolution.max(level_for_spacing(grid.bin_width()));
    Ok(compute_z(grid, &w, level))
}

fn checked_loglog(time: f64) -> Result<f64> {
    if time > LOGLOG_THRESHOLD {
        Ok(time.ln().ln())
    } else {
        Err(Error::BelowLogLogDomain(time))
    }
}

/// `(2 t^{3/2} ln ln t)^{1/2}`.
pub fn lil_normalizer(time: f64) -> Result<f64> {
    Ok((2.0 * time.powf(1.5) * checked_loglog(time)?).sqrt())
}

/// A raw scenery sum with its iterated-logarithm rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledValue {
    pub raw: f64,
    pub time: f64,
    pub scaled: f64,
}

pub fn rescale(raw: f64, time: f64) -> Result<RescaledValue> {
    let scaled = raw / lil_normalizer(time)?;
    Ok(RescaledValue { raw, time, scaled })
}

pub fn unscale(scaled: f64, time: f64) -> Result<f64> {
    Ok(scaled * lil_normalizer(time)?)
}

/// `kappa(t) = (ln ln sqrt(t) / ln ln t)^{1/2}`.
///
/// `Z_t / (2 t^{3/2} ln ln t)^{1/2}` has the law of `-kappa(t) int W_lambda dL_1`
/// with `lambda = sqrt(t)`; the factor converts between the two normalizers.
pub fn kappa(time: f64) -> Result<f64> {
    let lambda = time.sqrt();
    Ok((checked_loglog(lambda)? / checked_loglog(time)?).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_time::walk_local_time;
    use crate::sampler::fixed::{ConstantScenery, LinearProfile, TableScenery, ZeroProfile};
    use crate::sampler::{simulate_srw, BrownianPath, SceneryLaw};

    #[test]
    fn threshold_is_e_to_the_e() {
        assert!((LOGLOG_THRESHOLD - std::f64::consts::E.powf(std::f64::consts::E)).abs() < 1e-12);
    }

    #[test]
    fn k_hand_sum() {
        let path = WalkPath::from_positions(vec![0, 1, 0, -1]).unwrap();
        let scenery = TableScenery([(1, 2.0), (0, -1.0), (-1, 3.0)].into_iter().collect());
        assert_eq!(compute_k(&path, &scenery), 4.0);
        assert_eq!(compute_k_local_time(&walk_local_time(&path), &scenery), 4.0);
        assert_eq!(compute_k(&path, &ConstantScenery(0.0)), 0.0);
    }

    #[test]
    fn k_field_kind_checked() {
        let path = simulate_srw(10, 1);
        assert!(compute_k_field(&path, &QuenchedField::continuum(1, 0)).is_err());
        assert!(compute_k_field(&path, &QuenchedField::discrete(1, SceneryLaw::Gaussian)).is_ok());
    }

    #[test]
    fn z_zero_profile_and_single_bin() {
        let path = BrownianPath::from_values(0.01, vec![0.0; 101]).unwrap();
        let g = crate::local_time::bm_local_time(&path, 0.5).unwrap();
        assert_eq!(compute_z(&g, &ZeroProfile, 0), 0.0);
        // one bin [0, 0.5) of mass 2, W(x) = 3x gives increment 1.5
        assert!((compute_z(&g, &LinearProfile(3.0), 0) - 3.0).abs() < 1e-12);
        assert!(compute_z_field(&g, &QuenchedField::discrete(0, SceneryLaw::Gaussian)).is_err());
    }

    #[test]
    fn rescale_values() {
        assert_eq!(rescale(0.0, 100.0).unwrap().scaled, 0.0);
        // (2 * 100^{3/2} * ln ln 100)^{1/2} to 30 digits: 55.26625780361650484708
        let r = rescale(55.266_257_803_616_505, 100.0).unwrap();
        assert!((r.scaled - 1.0).abs() < 1e-14, "{}", r.scaled);
        assert!(matches!(rescale(1.0, 15.0), Err(Error::BelowLogLogDomain(_))));
        let back = unscale(r.scaled, 100.0).unwrap();
        assert!((back - r.raw).abs() < 1e-12);
    }

    #[test]
    fn kappa_at_e8() {
        let k = kappa(8f64.exp()).unwrap();
        assert!((k - (4f64.ln() / 8f64.ln()).sqrt()).abs() < 1e-12);
        assert!((k - 0.8165).abs() < 1e-4);
        assert!(kappa(1e300).unwrap() > kappa(1e10).unwrap());
    }
}
