#![allow(dead_code)]

use proptest::prelude::*;
use spectral_detect::dist::DiscreteSpectrum;
use spectral_detect::support::NoiseSignalModel;

/// Noise power, signal fraction and up to three signal atoms well above the noise.
pub fn model() -> impl Strategy<Value = NoiseSignalModel> {
    (
        0.5f64..2.0,
        0.05f64..0.9,
        prop::collection::vec((1.5f64..30.0, 0.1f64..1.0), 1..4),
    )
        .prop_map(|(sigma2, y1, raw)| {
            let mut atoms: Vec<(f64, f64)> = raw.into_iter().map(|(r, w)| (sigma2 * r, w)).collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            atoms.dedup_by(|a, b| a.0 <= b.0 * (1.0 + 1e-6));
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let atoms = atoms.into_iter().map(|(b, w)| (b, w / total)).collect();
            NoiseSignalModel::new(sigma2, y1, atoms).unwrap()
        })
}

/// Nonempty spectrum of positive values, possibly with repeats.
pub fn spectrum(max_len: usize) -> impl Strategy<Value = DiscreteSpectrum> {
    prop::collection::vec(prop_oneof![0.1f64..10.0, Just(1.0)], 1..max_len)
        .prop_map(|v| DiscreteSpectrum::new(v).unwrap())
}
