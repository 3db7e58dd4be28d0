//! Adaptive Gauss-Kronrod (7/15) quadrature.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by repeatedly
/// bisecting the segment with the largest error estimate.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let (first, err) = gk15(&mut f, a, b)?;
    let mut segments = vec![(a, b, first, err)];
    let mut total_err = err;
    while total_err > tol {
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                lo: a,
                hi: b,
                error: total_err,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, e) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature {
                lo: a,
                hi: b,
                error: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        total_err += e1 + e2 - e;
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    Ok(segments.iter().map(|s| s.2).sum())
}

/// Integrates over `[lo, hi]` after the substitution
/// `x = lo + (hi - lo)(1 - cos t)/2`, which turns square-root endpoint
/// behavior into a smooth integrand.
pub fn integrate_sqrt_edges<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let half = 0.5 * (hi - lo);
    integrate(
        |t: f64| {
            let x = lo + half * (1.0 - t.cos());
            Ok(f(x)? * half * t.sin())
        },
        0.0,
        std::f64::consts::PI,
        tol,
    )
}
