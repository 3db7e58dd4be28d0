//! Source enumeration from an observed spectrum.

use std::fmt;
use std::io::Write;

use crate::arraysim::{product_spectrum, CMatrix};
use crate::dist::{empirical_df, DiscreteSpectrum};
use crate::support::SupportLayout;
use crate::{Error, Result};

pub const DEFAULT_MIN_NOISE_FRACTION: f64 = 0.1;

const EQUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ModelBased,
    BlindGap,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ModelBased => "model_based",
            Method::BlindGap => "blind_gap",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub q_hat: usize,
    pub sigma2_hat: f64,
    /// Number of eigenvalues classified as noise (`p - q_hat`).
    pub gap_index: usize,
    /// Threshold for the model-based method, `lambda_{k+1} / lambda_k` for the blind one.
    pub gap_ratio: f64,
    pub method: Method,
}

/// Counts eigenvalues above the midpoint of the noise gap of `layout`.
pub fn detect_model_based(spec: &DiscreteSpectrum, layout: &SupportLayout) -> Result<DetectionResult> {
    let (x2, x3) = layout.noise_gap().ok_or_else(|| {
        Error::domain("layout has no separated noise component; use blind gap detection")
    })?;
    let p = spec.len();
    if p == 0 {
        return Err(Error::domain("empty spectrum"));
    }
    let t = 0.5 * (x2 + x3);
    let noise = spec.values().partition_point(|&v| v <= t);
    if noise == 0 {
        return Err(Error::Inconsistent { p });
    }
    let q_hat = p - noise;
    Ok(DetectionResult {
        q_hat,
        sigma2_hat: estimate_sigma2(spec, q_hat)?,
        gap_index: noise,
        gap_ratio: t,
        method: Method::ModelBased,
    })
}

/// Places the noise/signal boundary at the largest relative gap
/// `lambda_{k+1} / lambda_k` with at least `ceil(min_noise_fraction p)`
/// eigenvalues on the noise side. Ties go to the larger `k`.
pub fn detect_blind(spec: &DiscreteSpectrum, min_noise_fraction: f64) -> Result<DetectionResult> {
    if !(min_noise_fraction > 0.0 && min_noise_fraction < 1.0) {
        return Err(Error::domain(format!(
            "min_noise_fraction must lie in (0, 1), got {min_noise_fraction}"
        )));
    }
    let v = spec.values();
    let p = v.len();
    if p < 2 {
        return Err(Error::domain(format!("need at least 2 eigenvalues, got {p}")));
    }
    let (lo, hi) = (v[0], v[p - 1]);
    if hi - lo <= EQUAL_TOL * hi.abs().max(1.0) {
        return Ok(DetectionResult {
            q_hat: 0,
            sigma2_hat: estimate_sigma2(spec, 0)?,
            gap_index: p,
            gap_ratio: 1.0,
            method: Method::BlindGap,
        });
    }
    let k_min = ((min_noise_fraction * p as f64).ceil() as usize).max(1);
    let mut best: Option<(usize, f64)> = None;
    // k counts noise eigenvalues; the candidate gap is between v[k-1] and v[k]
    for k in k_min..p {
        let below = v[k - 1];
        if below <= 0.0 {
            continue;
        }
        let r = v[k] / below;
        if best.is_none_or(|(_, b)| r >= b) {
            best = Some((k, r));
        }
    }
    let (k, ratio) = best.ok_or_else(|| {
        Error::domain("no admissible gap: all candidate lower eigenvalues are zero")
    })?;
    if ratio <= 1.0 + EQUAL_TOL {
        // the admissible range is flat: everything counts as noise
        return Ok(DetectionResult {
            q_hat: 0,
            sigma2_hat: estimate_sigma2(spec, 0)?,
            gap_index: p,
            gap_ratio: 1.0,
            method: Method::BlindGap,
        });
    }
    let q_hat = p - k;
    Ok(DetectionResult {
        q_hat,
        sigma2_hat: estimate_sigma2(spec, q_hat)?,
        gap_index: k,
        gap_ratio: ratio,
        method: Method::BlindGap,
    })
}

/// Mean of the `p - q_hat` smallest eigenvalues.
pub fn estimate_sigma2(spec: &DiscreteSpectrum, q_hat: usize) -> Result<f64> {
    let p = spec.len();
    if q_hat >= p {
        return Err(Error::domain(format!("q_hat = {q_hat} must be below p = {p}")));
    }
    let noise = &spec.values()[..p - q_hat];
    // shifted mean: exact when all noise eigenvalues coincide
    let base = noise[0];
    Ok(base + noise.iter().map(|v| v - base).sum::<f64>() / noise.len() as f64)
}

/// Checks `F^{AB}(alpha beta) <= F^A(alpha) + F^B(beta)` for Hermitian
/// nonnegative definite `A`, `B`, with a small slack for eigenvalues sitting
/// on the evaluation points.
pub fn rank_perturbation_holds(a: &CMatrix, b: &CMatrix, alpha: f64, beta: f64) -> Result<bool> {
    let fa = empirical_df(&crate::arraysim::hermitian_eigenvalues(a)?)?;
    let fb = empirical_df(&crate::arraysim::hermitian_eigenvalues(b)?)?;
    let fab = empirical_df(&product_spectrum(a, b)?)?;
    let slack = 1e-9;
    Ok(fab.eval_left((alpha * beta) * (1.0 - slack))
        <= fa.eval(alpha * (1.0 + slack)) + fb.eval(beta * (1.0 + slack)) + 1e-12)
}

/// One detection outcome together with the trial it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRow {
    pub seed: u64,
    pub n: usize,
    pub y: f64,
    pub q_true: usize,
    pub result: DetectionResult,
}

pub const DETECTION_CSV_HEADER: &str = "seed,n,y,q_true,q_hat,sigma2_hat,gap_ratio,method";

pub fn write_detection_csv<W: Write>(mut w: W, rows: &[DetectionRow]) -> Result<()> {
    writeln!(w, "{DETECTION_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.seed, r.n, r.y, r.q_true, r.result.q_hat, r.result.sigma2_hat, r.result.gap_ratio, r.result.method
        )?;
    }
    Ok(())
}
