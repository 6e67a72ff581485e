use proptest::prelude::*;

use rwrs_core::bounds::s_of_f;
use rwrs_core::rwrs::{rescale, unscale, LOGLOG_THRESHOLD};
use rwrs_core::stats::{ks_distance, wasserstein1, EmpiricalDistribution};
use rwrs_core::strassen::{energy, StrassenFunction};

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..60)
}

fn dist(v: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::new(v.to_vec()).unwrap()
}

/// Piecewise-linear function through the origin on sorted distinct knots.
fn function() -> impl Strategy<Value = StrassenFunction> {
    (
        prop::collection::btree_set(-300i32..300, 1..8),
        prop::collection::vec(-1.0..1.0f64, 8),
    )
        .prop_map(|(knots, vals)| {
            let mut knots: Vec<f64> = knots.into_iter().map(|k| k as f64 / 100.0).collect();
            if !knots.contains(&0.0) {
                knots.push(0.0);
            }
            knots.sort_by(f64::total_cmp);
            let values = knots
                .iter()
                .enumerate()
                .map(|(i, &x)| if x == 0.0 { 0.0 } else { vals[i % vals.len()] })
                .collect();
            StrassenFunction::new(knots, values).unwrap()
        })
}

proptest! {
    #[test]
    fn distances_are_pseudometrics(a in sample(), b in sample(), c in sample()) {
        let (p, q, r) = (dist(&a), dist(&b), dist(&c));
        for d in [ks_distance, wasserstein1] {
            prop_assert_eq!(d(&p, &p), 0.0);
            prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
            prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9);
        }
        prop_assert!(ks_distance(&p, &q) <= 1.0);
    }

    #[test]
    fn distances_ignore_sample_order(a in sample(), b in sample()) {
        let mut rev = a.clone();
        rev.reverse();
        prop_assert_eq!(ks_distance(&dist(&a), &dist(&b)), ks_distance(&dist(&rev), &dist(&b)));
        prop_assert!((wasserstein1(&dist(&a), &dist(&b)) - wasserstein1(&dist(&rev), &dist(&b))).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_of_a_shift_is_the_shift(a in sample(), c in -5.0..5.0f64) {
        let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
        prop_assert!((wasserstein1(&dist(&a), &dist(&shifted)) - c.abs()).abs() < 1e-9);
    }

    #[test]
    fn unscale_inverts_rescale(raw in -1e6..1e6f64, t in (LOGLOG_THRESHOLD + 0.01)..1e9) {
        let back = unscale(rescale(raw, t).unwrap().scaled, t).unwrap();
        prop_assert!((back - raw).abs() <= 1e-9 * raw.abs().max(1.0));
    }

    #[test]
    fn knot_insertion_preserves_function_and_energy(f in function(), x in -4.0..4.0f64) {
        let g = f.with_knot(x);
        prop_assert!((energy(&f) - energy(&g)).abs() <= 1e-9 * energy(&f).max(1.0));
        for k in -50..=50 {
            let y = k as f64 / 10.0;
            prop_assert!((f.eval(y) - g.eval(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn s_is_monotone_under_domination(f in function(), c in 0.0..1.0f64) {
        let knots = f.knots().to_vec();
        let smaller = StrassenFunction::new(knots.clone(), f.values().iter().map(|v| c * v).collect()).unwrap();
        prop_assert!(s_of_f(&smaller) <= s_of_f(&f) + 1e-12);
        prop_assert!((s_of_f(&f.negated()) - s_of_f(&f)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip(f in function()) {
        prop_assert_eq!(StrassenFunction::from_csv(&f.to_csv()).unwrap(), f);
    }
}
