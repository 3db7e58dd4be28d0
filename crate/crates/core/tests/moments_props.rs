mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use spectral_detect::dist::DiscreteSpectrum;
use spectral_detect::moments::{mu_from_nu, nu_from_mu, spectrum_moments, MomentSequence};
use spectral_detect::stieltjes::DensityEvaluator;
use spectral_detect::support::{find_support_layout, NoiseSignalModel};

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Narayana numbers N(k, w) = C(k, w) C(k, w - 1) / k.
fn narayana(k: u64, w: u64) -> f64 {
    binomial(k, w) * binomial(k, w - 1) / k as f64
}

#[test]
fn point_mass_gives_narayana_polynomials() {
    for &y in &[0.1, 0.5, 1.0, 3.0] {
        let nu = nu_from_mu(&MomentSequence::new(vec![1.0; 8]).unwrap(), y).unwrap();
        for k in 1..=8u64 {
            // N(k, w) multiplies y^(k - w): for w = k that is the constant term 1
            let expected: f64 = (1..=k).map(|w| narayana(k, w) * y.powi((k - w) as i32)).sum();
            assert_relative_eq!(nu.get(k as usize), expected, max_relative = 1e-13);
        }
    }
}

/// `int x^k dF` by quadrature of the limiting density; an oracle independent
/// of the combinatorial formula.
fn density_moment(y: f64, model: &NoiseSignalModel, k: i32) -> f64 {
    let layout = find_support_layout(y, model).unwrap();
    let mut total = 0.0;
    for iv in &layout.intervals {
        let mut ev = DensityEvaluator::new(y, model, 1e-9 * iv.hi).unwrap();
        let n = 4000;
        let h = std::f64::consts::PI / n as f64;
        let half = 0.5 * (iv.hi - iv.lo);
        // midpoint rule in the cosine variable
        for j in 0..n {
            let t = (j as f64 + 0.5) * h;
            let x = iv.lo + half * (1.0 - t.cos());
            total += x.powi(k) * ev.density(x).unwrap() * half * t.sin() * h;
        }
    }
    total
}

#[test]
fn moments_match_density_quadrature() {
    let model = NoiseSignalModel::new(1.0, 0.3, vec![(4.0, 0.6), (9.0, 0.4)]).unwrap();
    let mu: Vec<f64> = (1..=4)
        .map(|k| 0.7 + 0.3 * (0.6 * 4f64.powi(k) + 0.4 * 9f64.powi(k)))
        .collect();
    for &y in &[0.05, 0.4] {
        let nu = nu_from_mu(&MomentSequence::new(mu.clone()).unwrap(), y).unwrap();
        for k in 1..=4 {
            assert_relative_eq!(nu.get(k as usize), density_moment(y, &model, k), max_relative = 1e-5);
        }
    }
}

fn population_moments() -> impl Strategy<Value = MomentSequence> {
    (common::spectrum(8), 1usize..=10)
        .prop_map(|(s, order)| spectrum_moments(&s, order).unwrap())
}

proptest! {
    #[test]
    fn round_trip_both_ways(mu in population_moments(), y in 0.01f64..1.5) {
        let nu = nu_from_mu(&mu, y).unwrap();
        let back = mu_from_nu(&nu, y).unwrap();
        for (a, b) in back.values().iter().zip(mu.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        let again = nu_from_mu(&back, y).unwrap();
        for (a, b) in again.values().iter().zip(nu.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn small_ratio_limit_is_monotone(mu in population_moments()) {
        let mut last = vec![f64::INFINITY; mu.order()];
        for j in 1..30 {
            let nu = nu_from_mu(&mu, 0.5f64.powi(j)).unwrap();
            for k in 1..=mu.order() {
                let d = (nu.get(k) - mu.get(k)).abs();
                prop_assert!(d <= last[k - 1] * (1.0 + 1e-12) + 1e-300);
                last[k - 1] = d;
            }
        }
        for k in 1..=mu.order() {
            prop_assert!(last[k - 1] <= 1e-6 * mu.get(k).abs().max(1.0));
        }
    }

    #[test]
    fn scaling_the_spectrum_scales_moments(s in common::spectrum(8), c in 0.1f64..5.0, y in 0.01f64..2.0) {
        let a = nu_from_mu(&spectrum_moments(&s, 6).unwrap(), y).unwrap();
        let b = nu_from_mu(&spectrum_moments(&s.scaled(c), 6).unwrap(), y).unwrap();
        for k in 1..=6 {
            prop_assert!((b.get(k) - c.powi(k as i32) * a.get(k)).abs() <= 1e-10 * b.get(k).abs());
        }
    }
}

#[test]
fn first_moment_is_preserved() {
    let mu = spectrum_moments(&DiscreteSpectrum::new(vec![1.0, 2.0, 7.0]).unwrap(), 3).unwrap();
    for &y in &[0.1, 1.0, 4.0] {
        assert_relative_eq!(nu_from_mu(&mu, y).unwrap().get(1), mu.get(1), max_relative = 1e-15);
    }
}
