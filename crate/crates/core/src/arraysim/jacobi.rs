//! Cyclic Jacobi eigenvalue iteration for complex Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix (unsorted). Sweeps until the
/// off-diagonal Frobenius norm falls below `1e-12 * ||M||_F`.
pub fn jacobi_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let scale = a.norm();
    if n == 0 {
        return Ok(Vec::new());
    }
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off = |a: &DMatrix<Complex64>| {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_SWEEPS {
        if off(&a) < 1e-12 * scale {
            return Ok((0..n).map(|i| a[(i, i)].re).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // phase that makes the (p, q) entry real, then a real rotation
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = D P with D = diag(1, conj(phase)) on (p, q)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    Err(Error::NoConvergence {
        what: "Jacobi eigenvalue sweeps",
        iterations: MAX_SWEEPS,
        last_x: f64::NAN,
        residual: off(&a) / scale,
    })
}
