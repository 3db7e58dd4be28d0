use num_complex::Complex64;
use proptest::prelude::*;
use rayon::prelude::*;
use spectral_detect::arraysim::{
    build_scenario, gaussian_matrix, hermitian_eigen_raw, hermitian_eigenvalues, jacobi_eigenvalues,
    sample_covariance, snapshots, uniform_angles, CMatrix, Scenario, ScenarioSpec, Seed, SnrProfile,
};
use spectral_detect::config::parse_config;
use spectral_detect::dist::{empirical_df, sup_distance};

fn small_scenario() -> Scenario {
    build_scenario(&ScenarioSpec {
        p: 4,
        angles: uniform_angles(-30.0, 40.0, 2),
        sigma2: 0.8,
        snr_db: SnrProfile::List(vec![1.0, 4.0]),
        bandwidth: 1,
        seed: 12,
    })
    .unwrap()
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn column_energy_matches_trace() {
    let s = small_scenario();
    let batch = snapshots(&s, 20_000, Seed::new(1, 0)).unwrap();
    let energy: Vec<f64> = (0..batch.n).map(|t| batch.x.column(t).norm_squared()).collect();
    let (mean, se) = mean_and_se(&energy);
    let trace: f64 = (0..s.p).map(|i| s.covariance[(i, i)].re).sum();
    assert!((mean - trace).abs() < 3.0 * se, "{mean} vs {trace} (se {se})");
}

#[test]
fn noise_entries_are_standardized() {
    let s = Scenario::pure_noise(5, 1.0).unwrap();
    let batch = snapshots(&s, 10_000, Seed::new(2, 0)).unwrap();
    let re: Vec<f64> = batch.x.iter().map(|v| v.re * v.re).collect();
    let im: Vec<f64> = batch.x.iter().map(|v| v.im * v.im).collect();
    let total: Vec<f64> = batch.x.iter().map(|v| v.norm_sqr()).collect();
    for (v, target) in [(&re, 0.5), (&im, 0.5), (&total, 1.0)] {
        let (mean, se) = mean_and_se(v);
        assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target}");
    }
}

#[test]
fn sample_covariance_is_unbiased() {
    let s = small_scenario();
    let batches: Vec<CMatrix> = (0..1000u32)
        .map(|t| sample_covariance(&snapshots(&s, 5, Seed::for_trial(3, 5, t)).unwrap()))
        .collect();
    for i in 0..s.p {
        for j in 0..s.p {
            let parts: [fn(Complex64) -> f64; 2] = [|z| z.re, |z| z.im];
            for part in parts {
                let v: Vec<f64> = batches.iter().map(|m| part(m[(i, j)])).collect();
                let (mean, se) = mean_and_se(&v);
                let target = part(s.covariance[(i, j)]);
                if se == 0.0 {
                    assert_eq!(mean, target);
                } else {
                    assert!((mean - target).abs() < 3.0 * se, "entry ({i},{j}): {mean} vs {target}");
                }
            }
        }
    }
}

#[test]
fn trace_identity_holds_exactly() {
    let s = small_scenario();
    let batch = snapshots(&s, 7, Seed::new(4, 4)).unwrap();
    let r = sample_covariance(&batch);
    let tr: f64 = (0..s.p).map(|i| r[(i, i)].re).sum();
    let energy: f64 = (0..7).map(|t| batch.x.column(t).norm_squared()).sum::<f64>() / 7.0;
    assert!((tr - energy).abs() < 1e-12 * energy);
}

#[test]
fn array50_population_spectrum() {
    let cfg = parse_config(include_str!("../configs/array50.conf")).unwrap();
    let s = build_scenario(&cfg.scenario_spec()).unwrap();
    let v = s.true_spectrum.values();
    assert_eq!(v.len(), 50);
    assert!(v[..15].iter().all(|&x| (x - 1.0).abs() < 1e-9));
    assert!(v[15..].iter().all(|&x| x > 1.0 + 1e-6));
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn spectrum_converges_for_fixed_dimension() {
    let s = build_scenario(&ScenarioSpec {
        p: 10,
        angles: uniform_angles(-45.0, 45.0, 3),
        sigma2: 1.0,
        snr_db: SnrProfile::List(vec![3.0, 6.0, 9.0]),
        bandwidth: 1,
        seed: 5,
    })
    .unwrap();
    let truth = empirical_df(&s.true_spectrum).unwrap();
    let (kolmogorov, deviation): (Vec<f64>, Vec<f64>) = [100usize, 1000, 10_000]
        .iter()
        .map(|&n| {
            let (k, d): (Vec<f64>, Vec<f64>) = (0..5u32)
                .into_par_iter()
                .map(|t| {
                    let batch = snapshots(&s, n, Seed::for_trial(8, n as u32, t)).unwrap();
                    let est = hermitian_eigenvalues(&sample_covariance(&batch)).unwrap();
                    let dev = est
                        .values()
                        .iter()
                        .zip(s.true_spectrum.values())
                        .map(|(a, b)| (a - b).abs() / b)
                        .fold(0.0, f64::max);
                    (sup_distance(&empirical_df(&est).unwrap(), &truth), dev)
                })
                .unzip();
            (median(k), median(d))
        })
        .unzip();
    // R has an atom of mass (p - q)/p at sigma2 and the sample eigenvalues
    // straddle it, so the Kolmogorov distance only stops growing; the
    // eigenvalue deviation (a bound on the Levy distance) goes to zero.
    assert!(kolmogorov.windows(2).all(|w| w[1] <= w[0]), "{kolmogorov:?}");
    assert!(deviation.windows(2).all(|w| w[1] < 0.5 * w[0]), "{deviation:?}");
    assert!(deviation[2] < 0.1, "{deviation:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_spectrum_structure(
        p in 3usize..24,
        frac in 0.1f64..0.9,
        span in 20.0f64..80.0,
        bandwidth in 0usize..4,
        seed in any::<u64>(),
        sigma2 in 0.2f64..5.0,
    ) {
        let q = ((p as f64 * frac) as usize).clamp(1, p - 1);
        let s = build_scenario(&ScenarioSpec {
            p,
            angles: uniform_angles(-span, span, q),
            sigma2,
            snr_db: SnrProfile::Uniform { lo: 0.0, hi: 10.0 },
            bandwidth,
            seed,
        })
        .unwrap();
        let v = s.true_spectrum.values();
        prop_assert!(v[..p - q].iter().all(|&x| (x - sigma2).abs() < 1e-9 * sigma2.max(1.0)));
        prop_assert!(v[p - q..].iter().all(|&x| x > sigma2 * (1.0 + 1e-9)));
        prop_assert!((&s.covariance - s.covariance.adjoint()).norm() < 1e-12 * s.covariance.norm());
    }

    #[test]
    fn library_eigensolver_matches_jacobi(n in 1usize..14, seed in any::<u64>()) {
        let mut rng = Seed::new(seed, 0).rng();
        let g = gaussian_matrix(&mut rng, n, n);
        let h = &g + g.adjoint();
        let mut a = jacobi_eigenvalues(&h).unwrap();
        a.sort_by(f64::total_cmp);
        let b = hermitian_eigen_raw(&h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10 * h.norm());
        }
        let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        prop_assert!((b.iter().sum::<f64>() - trace).abs() < 1e-10 * h.norm() * n as f64);
    }
}
