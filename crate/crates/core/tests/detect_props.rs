mod common;

use proptest::prelude::*;
use spectral_detect::arraysim::{build_scenario, uniform_angles, ScenarioSpec, SnrProfile};
use spectral_detect::detect::{detect_blind, detect_model_based, estimate_sigma2};
use spectral_detect::dist::DiscreteSpectrum;
use spectral_detect::support::{critical_y, find_support_layout};
use spectral_detect::Error;

proptest! {
    #[test]
    fn blind_is_scale_equivariant(s in common::spectrum(40), c in 0.01f64..100.0, f in 0.05f64..0.5) {
        prop_assume!(s.len() >= 3);
        let a = detect_blind(&s, f).unwrap();
        let b = detect_blind(&s.scaled(c), f).unwrap();
        prop_assert_eq!(a.q_hat, b.q_hat);
        prop_assert!((b.sigma2_hat - c * a.sigma2_hat).abs() <= 1e-12 * b.sigma2_hat);
    }

    #[test]
    fn blind_never_splits_duplicates(s in common::spectrum(30), copies in 1usize..4, f in 0.05f64..0.5) {
        let mut v = Vec::new();
        for _ in 0..copies {
            v.extend_from_slice(s.values());
        }
        let dup = DiscreteSpectrum::new(v).unwrap();
        prop_assume!(dup.len() >= 3);
        let r = detect_blind(&dup, f).unwrap();
        let vals = dup.values();
        if r.q_hat == 0 {
            prop_assert!(r.gap_ratio >= 1.0);
        } else {
            prop_assert!(r.gap_ratio > 1.0);
            prop_assert!(vals[r.gap_index] > vals[r.gap_index - 1]);
        }
    }

    #[test]
    fn model_based_is_scale_equivariant(model in common::model(), y in 0.01f64..0.5, c in 0.1f64..10.0, noise in 0.0f64..0.3) {
        let layout = find_support_layout(y, &model).unwrap();
        prop_assume!(layout.noise_gap().is_some());
        let (x1, x2) = (layout.intervals[0].lo, layout.intervals[0].hi);
        // a spectrum drawn across the support
        let mut v: Vec<f64> = (0..20).map(|i| x1 + (x2 - x1) * (i as f64 + noise) / 20.0).collect();
        v.extend(layout.intervals[1..].iter().map(|iv| 0.5 * (iv.lo + iv.hi)));
        let s = DiscreteSpectrum::new(v).unwrap();
        let a = detect_model_based(&s, &layout).unwrap();
        let scaled_layout = find_support_layout(y, &model.scaled(c).unwrap()).unwrap();
        let b = detect_model_based(&s.scaled(c), &scaled_layout).unwrap();
        prop_assert_eq!(a.q_hat, layout.intervals.len() - 1);
        prop_assert_eq!(a.q_hat, b.q_hat);
        prop_assert!((b.sigma2_hat - c * a.sigma2_hat).abs() <= 1e-9 * b.sigma2_hat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_population_spectra_are_counted(p in 6usize..40, frac in 0.1f64..0.8, seed in any::<u64>(), at in 0.01f64..0.99) {
        let q = ((p as f64 * frac) as usize).clamp(1, p - 1);
        let s = build_scenario(&ScenarioSpec {
            p,
            angles: uniform_angles(-60.0, 60.0, q),
            sigma2: 1.0,
            snr_db: SnrProfile::Uniform { lo: 0.0, hi: 10.0 },
            bandwidth: 1,
            seed,
        })
        .unwrap();
        let model = s.model().unwrap();
        let y = at * critical_y(&model).unwrap().min(10.0);
        let layout = find_support_layout(y, &model).unwrap();
        prop_assert!(layout.noise_gap().is_some());
        let m = detect_model_based(&s.true_spectrum, &layout).unwrap();
        prop_assert_eq!(m.q_hat, q);
        prop_assert!((m.sigma2_hat - 1.0).abs() < 1e-9);
        // the blind detector finds q exactly when the noise/signal ratio is
        // the widest relative gap; a wider gap inside the signal eigenvalues
        // makes it undercount
        let f = 0.5 * (p - q) as f64 / p as f64;
        let v = s.true_spectrum.values();
        let noise_gap = v[p - q] / v[p - q - 1];
        let widest = v[p - q..].windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        let blind = detect_blind(&s.true_spectrum, f).unwrap().q_hat;
        prop_assert!(blind <= q);
        if noise_gap >= widest {
            prop_assert_eq!(blind, q);
        } else {
            prop_assert!(blind < q);
        }
    }
}

#[test]
fn sigma2_of_exact_noise() {
    let s = DiscreteSpectrum::new(vec![0.7, 0.7, 0.7, 3.0, 8.0]).unwrap();
    assert_eq!(estimate_sigma2(&s, 2).unwrap(), 0.7);
    assert!(matches!(estimate_sigma2(&s, 5), Err(Error::Domain(_))));
}
