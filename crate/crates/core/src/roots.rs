//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::{Error, Result};

const MAX_ITER: usize = 400;

/// Finds a root of `f` in `[a, b]` where `f(a)` and `f(b)` have opposite signs.
///
/// `f` returns `(value, derivative)`. Newton steps are taken when they stay
/// inside the current bracket and shrink it fast enough; otherwise the
/// bracket is bisected. Stops when the step falls below `x_tol` (absolute)
/// or the bracket collapses to adjacent floats.
pub fn newton_bisect<F>(mut f: F, a: f64, b: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::domain(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    // orient so that f(lo) < 0 < f(hi)
    let flip = flo > 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        let neg = (fx < 0.0) != flip;
        if neg {
            lo = x;
        } else {
            hi = x;
        }
        let newton_ok = dfx.is_finite() && dfx != 0.0 && {
            let xn = x - fx / dfx;
            xn > lo && xn < hi && (fx / dfx).abs() * 2.0 <= dx_old.abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() <= x_tol || hi - lo <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let (v, d) = f(x);
        fx = v;
        dfx = d;
    }
    Err(Error::NoConvergence {
        what: "safeguarded Newton",
        iterations: MAX_ITER,
        last_x: x,
        residual: fx,
    })
}

/// Minimizes a smooth convex function on the open interval `(a, b)` whose
/// derivative tends to `-inf` at `a` and `+inf` at `b`.
///
/// `df` returns `(g', g'')`. Interior probes approach each end geometrically
/// until the derivative has the expected sign, then the stationary point is
/// refined with [`newton_bisect`].
pub fn convex_argmin<F>(mut df: F, a: f64, b: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let left = probe_toward(&mut df, a, b, |d| d < 0.0)?;
    let right = probe_toward(&mut df, b, a, |d| d > 0.0)?;
    if left >= right {
        return Ok(0.5 * (left + right));
    }
    newton_bisect(df, left, right, x_tol)
}

/// Walks from the midpoint of `(end, other)` toward `end` until `accept(f(x))`.
pub(crate) fn probe_toward<F, P>(f: &mut F, end: f64, other: f64, accept: P) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
    P: Fn(f64) -> bool,
{
    let mut offset = 0.5 * (other - end);
    for _ in 0..1100 {
        let x = end + offset;
        if x == end {
            break;
        }
        let (v, _) = f(x);
        if v.is_finite() && accept(v) {
            return Ok(x);
        }
        offset *= 0.5;
    }
    Err(Error::NoConvergence {
        what: "bracket search",
        iterations: 1100,
        last_x: end,
        residual: f64::NAN,
    })
}
