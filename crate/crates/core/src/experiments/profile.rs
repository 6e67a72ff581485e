use crate::error::Result;
use crate::sampler::{DiscreteScenery, QuenchedField, SceneryProfile, SiteScenery};

/// `Xi(x) = sum_{y=1}^x xi_y` for `x > 0`, `Xi(0) = 0` and
/// `Xi(x) = -sum_{y=x+1}^0 xi_y` for `x < 0`, so that `xi_x = Xi(x) - Xi(x - 1)`
/// everywhere. Real arguments interpolate linearly between sites.
///
/// Partial sums are tabulated on `[-radius, radius]`; beyond it they are
/// summed on demand.
#[derive(Debug, Clone)]
pub struct ScenerySumProfile<S> {
    scenery: S,
    radius: i64,
    table: Vec<f64>,
}

impl<S: SiteScenery> ScenerySumProfile<S> {
    pub fn new(scenery: S, radius: u32) -> Self {
        let radius = radius as i64;
        let mut table = vec![0.0; (2 * radius + 1) as usize];
        for x in 1..=radius {
            table[(radius + x) as usize] = table[(radius + x - 1) as usize] + scenery.site_value(x);
            table[(radius - x) as usize] = table[(radius - x + 1) as usize] - scenery.site_value(-x + 1);
        }
        Self { scenery, radius, table }
    }

    pub fn scenery(&self) -> &S {
        &self.scenery
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// `Xi(x)` at an integer site.
    pub fn partial_sum(&self, x: i64) -> f64 {
        if x.abs() <= self.radius {
            return self.table[(x + self.radius) as usize];
        }
        if x > 0 {
            self.table[(2 * self.radius) as usize]
                + (self.radius + 1..=x).map(|y| self.scenery.site_value(y)).sum::<f64>()
        } else {
            self.table[0] - (x + 1..=-self.radius).map(|y| self.scenery.site_value(y)).sum::<f64>()
        }
    }
}

impl<S: SiteScenery> SceneryProfile for ScenerySumProfile<S> {
    fn value(&self, x: f64, _level: i32) -> f64 {
        let lo = x.floor();
        let a = self.partial_sum(lo as i64);
        if lo == x {
            a
        } else {
            a + (self.partial_sum(lo as i64 + 1) - a) * (x - lo)
        }
    }
}

/// The partial-sum profile of a discrete field, tabulated on
/// `[-radius, radius]`.
pub fn scenery_profile(field: &QuenchedField, radius: u32) -> Result<ScenerySumProfile<DiscreteScenery>> {
    Ok(ScenerySumProfile::new(field.as_discrete()?, radius))
}
