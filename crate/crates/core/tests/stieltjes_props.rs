mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_detect::stieltjes::{default_eta, limiting_cdf, solve_stieltjes, DensityEvaluator, RESIDUAL_TOL};
use spectral_detect::support::{critical_y, find_support_layout, NoiseSignalModel};

proptest! {
    #[test]
    fn herglotz_and_residual(model in common::model(), y in 0.01f64..3.0, re in -5.0f64..60.0, le in -8.0f64..2.0) {
        let z = Complex64::new(re * model.sigma2(), le.exp());
        let s = solve_stieltjes(z, y, &model).unwrap();
        prop_assert!(s.a_value.im > 0.0);
        prop_assert!(s.residual < RESIDUAL_TOL);
        prop_assert!(s.b_value(y).im > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_lives_on_the_layout(model in common::model(), y in 0.01f64..2.0) {
        let layout = find_support_layout(y, &model).unwrap();
        for (i, iv) in layout.intervals.iter().enumerate() {
            let w = iv.hi - iv.lo;
            let mut ev = DensityEvaluator::new(y, &model, default_eta(iv.lo, iv.hi)).unwrap();
            let peak = (1..40)
                .map(|k| ev.density(iv.lo + w * k as f64 / 40.0).unwrap())
                .fold(0.0, f64::max);
            prop_assert!(peak > 1e-6);
            // points well outside this component and not inside another one
            let next_lo = layout.intervals.get(i + 1).map_or(f64::INFINITY, |n| n.lo);
            for x in [iv.hi + 0.05 * w, iv.hi + 0.3 * w] {
                if x < next_lo - 0.05 * w {
                    prop_assert!(ev.density(x).unwrap() < 1e-6, "density {} at {}", ev.density(x).unwrap(), x);
                }
            }
        }
        let first = layout.intervals[0];
        let x = first.lo - 0.05 * (first.hi - first.lo);
        if x > 0.0 {
            let mut ev = DensityEvaluator::new(y, &model, default_eta(first.lo, first.hi)).unwrap();
            prop_assert!(ev.density(x).unwrap() < 1e-6);
        }
    }

    #[test]
    fn numeric_cdf_is_continuous(model in common::model(), y in 0.01f64..2.0) {
        let f = limiting_cdf(y, &model, 200).unwrap();
        prop_assert!((f.total_mass() - 1.0).abs() < 1e-9);
        // the only atom is at zero
        prop_assert!(f.atoms().iter().all(|&(x, _)| x == 0.0));
        prop_assert!(f.max_grid_increment() < 0.05);
    }
}

fn relative_maxima(xs: &[f64], d: &[f64]) -> Vec<f64> {
    (1..d.len() - 1)
        .filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1])
        .map(|i| xs[i])
        .collect()
}

#[test]
fn merged_components_show_two_maxima() {
    let model = NoiseSignalModel::single_spike(1.0, 0.2, 10.0).unwrap();
    let yc = critical_y(&model).unwrap();
    let y = 1.05 * yc;
    let layout = find_support_layout(y, &model).unwrap();
    assert_eq!(layout.intervals.len(), 1);
    let iv = layout.intervals[0];
    let xs: Vec<f64> = (1..2000).map(|k| iv.lo + (iv.hi - iv.lo) * k as f64 / 2000.0).collect();
    let mut ev = DensityEvaluator::new(y, &model, default_eta(iv.lo, iv.hi)).unwrap();
    let d: Vec<f64> = xs.iter().map(|&x| ev.density(x).unwrap()).collect();
    assert_eq!(relative_maxima(&xs, &d).len(), 2);

    // just below the critical ratio each component is unimodal
    let y = 0.95 * yc;
    let layout = find_support_layout(y, &model).unwrap();
    assert_eq!(layout.intervals.len(), 2);
    for iv in &layout.intervals {
        let xs: Vec<f64> = (1..1000).map(|k| iv.lo + (iv.hi - iv.lo) * k as f64 / 1000.0).collect();
        let mut ev = DensityEvaluator::new(y, &model, default_eta(iv.lo, iv.hi)).unwrap();
        let d: Vec<f64> = xs.iter().map(|&x| ev.density(x).unwrap()).collect();
        assert_eq!(relative_maxima(&xs, &d).len(), 1);
    }
}
