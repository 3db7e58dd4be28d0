//! The limiting distribution F through its Stieltjes transform.
//!
//! Let K = (1 - y) delta_0 + y F be the companion limit and A its Stieltjes
//! transform. For Im z > 0, A(z) is the unique solution in the upper half
//! plane of
//!
//! ```text
//! A = 1 / (-z + y sum_x h_x x / (1 + x A))
//! ```
//!
//! The transform of F is `B = (A - (1 - y)/(-z)) / y`, and the density of F
//! is recovered as `Im B(x + i eta) / pi` for small `eta`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::dist::{SampledCdf, StepDF};
use crate::quad::{integrate, integrate_sqrt_edges};
use crate::support::{find_support_layout, NoiseSignalModel, SupportLayout};
use crate::{Error, Result};

/// Largest accepted defect `|A (-z + y sum ...) - 1|` of a solution.
pub const RESIDUAL_TOL: f64 = 1e-12;

const FIXED_POINT_ITERS: usize = 2000;
const NEWTON_ITERS: usize = 60;
const MAX_HALVINGS: usize = 12;

/// A solved point of the fixed-point equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesSolution {
    pub z: Complex64,
    /// Stieltjes transform of the companion limit K at `z`.
    pub a_value: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

impl StieltjesSolution {
    /// Stieltjes transform of F at `z`.
    pub fn b_value(&self, y: f64) -> Complex64 {
        (self.a_value - (1.0 - y) / (-self.z)) / y
    }
}

/// Marchenko-Pastur density of F for `T = sigma2 I`, without the atom at 0
/// that appears for `y > 1`.
pub fn mp_density(x: f64, y: f64, sigma2: f64) -> f64 {
    let s = y.sqrt();
    let lo = sigma2 * (1.0 - s).powi(2);
    let hi = sigma2 * (1.0 + s).powi(2);
    if x <= lo || x >= hi {
        return 0.0;
    }
    ((x - lo) * (hi - x)).sqrt() / (2.0 * PI * sigma2 * y * x)
}

/// Population atoms in the form the solver iterates over.
#[derive(Debug, Clone)]
struct Equation {
    y: f64,
    atoms: Vec<(f64, f64)>,
}

impl Equation {
    fn new(y: f64, model: &NoiseSignalModel) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::domain(format!("aspect ratio must be positive, got {y}")));
        }
        Ok(Self {
            y,
            atoms: model.population_atoms(),
        })
    }

    fn denominator(&self, z: Complex64, a: Complex64) -> Complex64 {
        let s: Complex64 = self
            .atoms
            .iter()
            .map(|&(x, h)| h * x / (1.0 + x * a))
            .sum();
        -z + self.y * s
    }

    fn residual(&self, z: Complex64, a: Complex64) -> f64 {
        (a * self.denominator(z, a) - 1.0).norm()
    }

    fn scale(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).fold(0.0, f64::max)
    }

    /// Damped fixed-point iteration; returns the last iterate and its count.
    fn fixed_point(&self, z: Complex64, start: Complex64) -> (Complex64, usize) {
        let mut a = start;
        let mut step = f64::INFINITY;
        let mut damping = 1.0;
        for it in 1..=FIXED_POINT_ITERS {
            let next = 1.0 / self.denominator(z, a);
            let proposed = a + damping * (next - a);
            let delta = (proposed - a).norm();
            if delta > step {
                damping = 0.5;
            }
            step = delta;
            a = proposed;
            if delta <= 1e-15 * a.norm() {
                return (a, it);
            }
        }
        (a, FIXED_POINT_ITERS)
    }

    /// Newton on `-1/A + y sum h x/(1 + x A) - z = 0`. Returns `None` unless it
    /// converges to an upper-half-plane point within tolerance.
    fn newton(&self, z: Complex64, start: Complex64) -> Option<(Complex64, usize)> {
        let mut a = start;
        for it in 1..=NEWTON_ITERS {
            let mut s = Complex64::new(0.0, 0.0);
            let mut ds = Complex64::new(0.0, 0.0);
            for &(x, h) in &self.atoms {
                let d = 1.0 / (1.0 + x * a);
                s += h * x * d;
                ds += h * x * x * d * d;
            }
            let inv = 1.0 / a;
            let f = -inv + self.y * s - z;
            let df = inv * inv - self.y * ds;
            let step = f / df;
            if !step.is_finite() {
                return None;
            }
            a -= step;
            if step.norm() <= 1e-15 * a.norm() {
                return (a.im > 0.0 && self.residual(z, a) < RESIDUAL_TOL).then_some((a, it));
            }
        }
        (a.im > 0.0 && self.residual(z, a) < RESIDUAL_TOL).then_some((a, NEWTON_ITERS))
    }

    fn solve(&self, z: Complex64, guess: Option<Complex64>) -> Result<StieltjesSolution> {
        if !(z.im > 0.0) || !z.is_finite() {
            return Err(Error::domain(format!("Stieltjes solve needs Im z > 0, got {z}")));
        }
        if let Some(g) = guess.filter(|g| g.im > 0.0) {
            if let Some((a, iterations)) = self.newton(z, g) {
                return Ok(self.solution(z, a, iterations));
            }
        }
        // Far from the real axis the fixed point contracts quickly; walk the
        // imaginary part down from there with Newton.
        let top = z.im.max(self.scale()).max(z.re.abs()).max(1.0);
        let start = Complex64::new(z.re, top);
        let (mut a, mut iterations) = self.fixed_point(start, Complex64::i());
        if let Some((polished, it)) = self.newton(start, a) {
            a = polished;
            iterations += it;
        } else if self.residual(start, a) >= RESIDUAL_TOL || a.im <= 0.0 {
            return Err(Error::Stieltjes {
                z: start,
                last: a,
                residual: self.residual(start, a),
            });
        }
        let mut eta = top;
        let mut ratio: f64 = 0.5;
        let mut halvings = 0;
        while eta > z.im {
            let next_eta = (eta * ratio).max(z.im);
            let target = Complex64::new(z.re, next_eta);
            match self.newton(target, a) {
                Some((next, it)) => {
                    a = next;
                    eta = next_eta;
                    iterations += it;
                    ratio = (ratio * ratio).max(0.5);
                }
                None => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::Stieltjes {
                            z,
                            last: a,
                            residual: self.residual(target, a),
                        });
                    }
                    ratio = ratio.sqrt();
                }
            }
        }
        Ok(self.solution(z, a, iterations))
    }

    fn solution(&self, z: Complex64, a: Complex64, iterations: usize) -> StieltjesSolution {
        StieltjesSolution {
            z,
            a_value: a,
            residual: self.residual(z, a),
            iterations,
        }
    }
}

/// Solves for A(z), `Im z > 0`.
pub fn solve_stieltjes(z: Complex64, y: f64, model: &NoiseSignalModel) -> Result<StieltjesSolution> {
    Equation::new(y, model)?.solve(z, None)
}

/// As [`solve_stieltjes`], trying Newton from `guess` first (warm start).
pub fn solve_stieltjes_from(
    z: Complex64,
    y: f64,
    model: &NoiseSignalModel,
    guess: Complex64,
) -> Result<StieltjesSolution> {
    Equation::new(y, model)?.solve(z, Some(guess))
}

/// Smoothing width used when inverting over an interval `[lo, hi]`.
pub fn default_eta(lo: f64, hi: f64) -> f64 {
    (1e-3 * (hi - lo) / 512.0).max(1e-7)
}

/// Density evaluator that warm-starts each solve from the previous point.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    eq: Equation,
    eta: f64,
    last: Option<(Complex64, Complex64)>,
}

impl DensityEvaluator {
    pub fn new(y: f64, model: &NoiseSignalModel, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::domain(format!("smoothing width must be positive, got {eta}")));
        }
        Ok(Self {
            eq: Equation::new(y, model)?,
            eta,
            last: None,
        })
    }

    fn smoothed(&self, a: Complex64, z: Complex64) -> f64 {
        let y = self.eq.y;
        let b = (a - (1.0 - y) / (-z)) / y;
        b.im / PI
    }

    /// F'(x), with one Richardson step over `eta` and `eta/2`.
    pub fn density(&mut self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("density is evaluated at x > 0, got {x}")));
        }
        let z1 = Complex64::new(x, self.eta);
        let z2 = Complex64::new(x, 0.5 * self.eta);
        let s1 = self.eq.solve(z1, self.last.map(|l| l.0))?;
        let s2 = self.eq.solve(z2, Some(s1.a_value))?;
        self.last = Some((s1.a_value, s2.a_value));
        let d = 2.0 * self.smoothed(s2.a_value, z2) - self.smoothed(s1.a_value, z1);
        Ok(d.max(0.0))
    }
}

/// F'(x) for `x > 0` via inversion at `x + i eta`.
pub fn limiting_density(x: f64, y: f64, model: &NoiseSignalModel, eta: f64) -> Result<f64> {
    DensityEvaluator::new(y, model, eta)?.density(x)
}

/// F' on a grid, warm-starting along it.
pub fn density_curve(xs: &[f64], y: f64, model: &NoiseSignalModel, eta: f64) -> Result<Vec<f64>> {
    let mut ev = DensityEvaluator::new(y, model, eta)?;
    xs.iter().map(|&x| ev.density(x)).collect()
}

/// Writes `x,density` rows.
pub fn write_density_csv<W: Write>(mut w: W, xs: &[f64], density: &[f64]) -> Result<()> {
    writeln!(w, "x,density")?;
    for (x, d) in xs.iter().zip(density) {
        writeln!(w, "{x},{d}")?;
    }
    Ok(())
}

/// Mass of F on `[lo, hi]`, `0 < lo < hi`, by quadrature of the density.
pub fn interval_mass(lo: f64, hi: f64, y: f64, model: &NoiseSignalModel) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let mut ev = DensityEvaluator::new(y, model, default_eta(lo, hi))?;
    integrate_sqrt_edges(|x| ev.density(x), lo, hi, 1e-7)
}

/// Numeric F as a [`StepDF`]: the atom at 0 (for `y > 1`) plus a CDF sampled on
/// `points` Chebyshev-spaced nodes per support component. Each component's
/// increments are rescaled to its exact mass from the layout, so the result
/// has total mass 1 up to rounding.
pub fn limiting_cdf(y: f64, model: &NoiseSignalModel, points: usize) -> Result<StepDF> {
    let layout = find_support_layout(y, model)?;
    limiting_cdf_with_layout(y, model, &layout, points)
}

pub fn limiting_cdf_with_layout(
    y: f64,
    model: &NoiseSignalModel,
    layout: &SupportLayout,
    points: usize,
) -> Result<StepDF> {
    if points < 2 {
        return Err(Error::domain("need at least two grid points per component"));
    }
    let mut grid = Vec::new();
    let mut cdf = Vec::new();
    let mut below = 0.0;
    for iv in &layout.intervals {
        let half = 0.5 * (iv.hi - iv.lo);
        let node = |k: usize| iv.lo + half * (1.0 - (PI * k as f64 / points as f64).cos());
        let mut ev = DensityEvaluator::new(y, model, default_eta(iv.lo, iv.hi))?;
        let mut increments = Vec::with_capacity(points);
        for k in 0..points {
            let (t0, t1) = (PI * k as f64 / points as f64, PI * (k + 1) as f64 / points as f64);
            let inc = integrate(
                |t: f64| {
                    let x = iv.lo + half * (1.0 - t.cos());
                    if x <= 0.0 {
                        return Ok(0.0);
                    }
                    Ok(ev.density(x)? * half * t.sin())
                },
                t0,
                t1,
                1e-10,
            )?;
            increments.push(inc);
        }
        let total: f64 = increments.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Quadrature {
                lo: iv.lo,
                hi: iv.hi,
                error: f64::NAN,
            });
        }
        let scale = iv.mass / total;
        grid.push(node(0));
        cdf.push(below);
        let mut acc = below;
        for (k, inc) in increments.iter().enumerate() {
            acc += inc * scale;
            grid.push(node(k + 1));
            cdf.push(acc.min(1.0));
        }
        below += iv.mass;
        if let Some(last) = cdf.last_mut() {
            *last = below.min(1.0);
        }
    }
    // F = atom + continuous part; the sampled CDF holds only the continuous mass
    let continuous = SampledCdf::new(grid, cdf)?;
    let atoms = if layout.atom_at_zero > 0.0 {
        vec![(0.0, layout.atom_at_zero)]
    } else {
        vec![]
    };
    StepDF::new(atoms, Some(continuous))
}
