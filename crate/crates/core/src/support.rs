//! Support geometry of the limiting spectral distribution.
//!
//! The population spectrum is a mixture `H = (1 - y1) delta(sigma2) + y1 G`
//! with `G` a finite collection of signal atoms above `sigma2`. The support of
//! the limit F is read off the boundary function
//!
//! ```text
//! f(a) = -1/a + y (1 - y1)/(a + 1/sigma2) + y y1 sum_j w_j/(a + 1/b_j)
//! ```
//!
//! whose derivative is `(1 - g(a))/a^2` with
//! `g(a) = y sum_x h_x (a/(a + 1/x))^2`. On every open interval of the
//! negative axis between consecutive poles `g` is convex, which pins down the
//! number of stationary points of `f` per interval: at most two between
//! interior poles, exactly one next to the origin, and one on the far left
//! when `y < 1`. The maximal ranges where `g >= 1` (they contain the poles)
//! are the support components; their masses follow from the residues of the
//! enclosed poles.

use std::io::Write;

use crate::dist::DiscreteSpectrum;
use crate::roots::{convex_argmin, newton_bisect, probe_toward};
use crate::{Error, Result};

/// Relative tolerance used when grouping eigenvalues of a population
/// covariance into noise and signal atoms.
pub const POPULATION_TOL: f64 = 1e-9;

const ALPHA_TOL: f64 = 1e-15;

/// Population spectrum `H = (1 - y1) delta(sigma2) + y1 G`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSignalModel {
    sigma2: f64,
    y1: f64,
    /// Signal atoms `(b_j, w_j)`, strictly increasing in `b_j`, weights summing to 1.
    signal: Vec<(f64, f64)>,
}

impl NoiseSignalModel {
    pub fn new(sigma2: f64, y1: f64, signal: Vec<(f64, f64)>) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain(format!("noise power must be positive, got {sigma2}")));
        }
        if !(0.0..1.0).contains(&y1) {
            return Err(Error::domain(format!("signal fraction must lie in [0, 1), got {y1}")));
        }
        if y1 == 0.0 {
            if !signal.is_empty() {
                return Err(Error::domain("a pure-noise model cannot carry signal atoms"));
            }
            return Ok(Self::pure_noise(sigma2));
        }
        if signal.is_empty() {
            return Err(Error::domain("positive signal fraction needs at least one atom"));
        }
        if signal.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::domain("signal atoms must be strictly increasing"));
        }
        if signal.iter().any(|&(b, w)| !(b > sigma2) || !b.is_finite() || !(w > 0.0)) {
            return Err(Error::domain(
                "signal atoms must lie above the noise power with positive weights",
            ));
        }
        let total: f64 = signal.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("signal weights sum to {total}, expected 1")));
        }
        Ok(Self { sigma2, y1, signal })
    }

    pub fn pure_noise(sigma2: f64) -> Self {
        assert!(sigma2 > 0.0, "noise power must be positive");
        Self {
            sigma2,
            y1: 0.0,
            signal: Vec::new(),
        }
    }

    /// G is a single atom at `b`.
    pub fn single_spike(sigma2: f64, y1: f64, b: f64) -> Result<Self> {
        Self::new(sigma2, y1, vec![(b, 1.0)])
    }

    /// Splits the eigenvalues of a population covariance `BB* + sigma2 I` into
    /// the noise atom (values within [`POPULATION_TOL`] of `sigma2`) and equally
    /// weighted signal atoms.
    pub fn from_population_spectrum(spec: &DiscreteSpectrum, sigma2: f64) -> Result<Self> {
        if spec.is_empty() {
            return Err(Error::domain("empty population spectrum"));
        }
        let tol = POPULATION_TOL * sigma2;
        if let Some(v) = spec.values().iter().find(|&&v| v < sigma2 - tol) {
            return Err(Error::domain(format!(
                "eigenvalue {v} lies below the noise power {sigma2}"
            )));
        }
        let signal: Vec<f64> = spec
            .values()
            .iter()
            .copied()
            .filter(|&v| v > sigma2 + tol)
            .collect();
        let p = spec.len() as f64;
        let q = signal.len() as f64;
        if signal.is_empty() {
            return Ok(Self::pure_noise(sigma2));
        }
        if signal.len() == spec.len() {
            return Err(Error::domain("population spectrum has no noise eigenvalues"));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for v in signal {
            match atoms.last_mut() {
                Some((b, w)) if (v - *b).abs() <= POPULATION_TOL * v => *w += 1.0 / q,
                _ => atoms.push((v, 1.0 / q)),
            }
        }
        // exact weights regardless of rounding in the running sums
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in &mut atoms {
            a.1 /= total;
        }
        Self::new(sigma2, q / p, atoms)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn signal_atoms(&self) -> &[(f64, f64)] {
        &self.signal
    }

    /// Smallest signal atom `b_1`.
    pub fn b_min(&self) -> Option<f64> {
        self.signal.first().map(|a| a.0)
    }

    /// Largest signal atom `b_2`.
    pub fn b_max(&self) -> Option<f64> {
        self.signal.last().map(|a| a.0)
    }

    /// Atoms of H as `(location, weight)`, noise first.
    pub fn population_atoms(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(self.sigma2, 1.0 - self.y1)];
        out.extend(self.signal.iter().map(|&(b, w)| (b, self.y1 * w)));
        out
    }

    /// Same model with every power multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain("scale factor must be positive"));
        }
        Self::new(
            self.sigma2 * c,
            self.y1,
            self.signal.iter().map(|&(b, w)| (b * c, w)).collect(),
        )
    }

    /// `(c, h)` pairs: pole at `-c = -1/x` with H-weight `h`, ordered by pole position.
    fn poles(&self) -> Vec<(f64, f64)> {
        self.population_atoms()
            .into_iter()
            .map(|(x, h)| (1.0 / x, h))
            .collect()
    }
}

fn check_pole(alpha: f64, poles: &[(f64, f64)]) -> Result<()> {
    if !alpha.is_finite() || alpha == 0.0 || poles.iter().any(|&(c, _)| alpha + c == 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} is a pole")));
    }
    Ok(())
}

fn f_raw(alpha: f64, y: f64, poles: &[(f64, f64)]) -> f64 {
    -1.0 / alpha + y * poles.iter().map(|&(c, h)| h / (alpha + c)).sum::<f64>()
}

fn g_raw(alpha: f64, y: f64, poles: &[(f64, f64)]) -> f64 {
    y * poles
        .iter()
        .map(|&(c, h)| {
            let r = alpha / (alpha + c);
            h * r * r
        })
        .sum::<f64>()
}

/// `(g', g'')`.
fn g_derivs(alpha: f64, y: f64, poles: &[(f64, f64)]) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &(c, h) in poles {
        let s = alpha + c;
        let s3 = s * s * s;
        d1 += h * alpha * c / s3;
        d2 += h * c * (c - 2.0 * alpha) / (s3 * s);
    }
    (2.0 * y * d1, 2.0 * y * d2)
}

/// Boundary function f(alpha); its local extrema are the support endpoints.
pub fn f_alpha(alpha: f64, y: f64, model: &NoiseSignalModel) -> Result<f64> {
    let poles = model.poles();
    check_pole(alpha, &poles)?;
    Ok(f_raw(alpha, y, &poles))
}

/// Splitting function g(alpha), with `f'(alpha) = (1 - g(alpha))/alpha^2`.
pub fn g_alpha(alpha: f64, y: f64, model: &NoiseSignalModel) -> Result<f64> {
    let poles = model.poles();
    if !alpha.is_finite() || poles.iter().any(|&(c, _)| alpha + c == 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} is a pole")));
    }
    Ok(g_raw(alpha, y, &poles))
}

/// f'(alpha) through the closed-form identity.
pub fn f_alpha_prime(alpha: f64, y: f64, model: &NoiseSignalModel) -> Result<f64> {
    let poles = model.poles();
    check_pole(alpha, &poles)?;
    Ok((1.0 - g_raw(alpha, y, &poles)) / (alpha * alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Connected components of the support of F, left to right, plus the atom at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportLayout {
    pub atom_at_zero: f64,
    pub intervals: Vec<SupportInterval>,
    /// Whether the leftmost component carries only the noise part of H.
    pub noise_separated: bool,
}

/// The four endpoints tabulated per aspect ratio: the noise component is
/// `[x1, x2]`, the remaining support lies in `[x3, x4]`. `x2`, `x3` are absent
/// when the noise component is not separated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoints {
    pub x1: f64,
    pub x2: Option<f64>,
    pub x3: Option<f64>,
    pub x4: f64,
}

impl SupportLayout {
    pub fn total_mass(&self) -> f64 {
        self.atom_at_zero + self.intervals.iter().map(|i| i.mass).sum::<f64>()
    }

    /// `(x2, x3)`: the gap between the noise component and the rest.
    pub fn noise_gap(&self) -> Option<(f64, f64)> {
        if self.noise_separated && self.intervals.len() >= 2 {
            Some((self.intervals[0].hi, self.intervals[1].lo))
        } else {
            None
        }
    }

    pub fn endpoints(&self) -> Endpoints {
        let first = self.intervals.first().expect("layout has a component");
        let last = self.intervals.last().expect("layout has a component");
        let gap = self.noise_gap();
        Endpoints {
            x1: first.lo,
            x2: gap.map(|g| g.0),
            x3: gap.map(|g| g.1),
            x4: last.hi,
        }
    }

    /// Whether `x` lies in some component (closed intervals).
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo <= x && x <= i.hi)
    }
}

impl Endpoints {
    /// Limit of the endpoints as `y -> 0`: `(sigma2, sigma2, b_1, b_2)`.
    pub fn at_zero_ratio(model: &NoiseSignalModel) -> Self {
        let s = model.sigma2();
        match (model.b_min(), model.b_max()) {
            (Some(b1), Some(b2)) => Self {
                x1: s,
                x2: Some(s),
                x3: Some(b1),
                x4: b2,
            },
            _ => Self {
                x1: s,
                x2: None,
                x3: None,
                x4: s,
            },
        }
    }
}

/// Writes one `y,x1,x2,x3,x4` row per entry; missing endpoints are left empty.
pub fn write_endpoints_csv<W: Write>(mut w: W, rows: &[(f64, Endpoints)]) -> Result<()> {
    writeln!(w, "y,x1,x2,x3,x4")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (y, e) in rows {
        writeln!(w, "{y},{},{},{},{}", e.x1, opt(e.x2), opt(e.x3), e.x4)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    /// Region extends to -infinity on the alpha axis.
    MinusInfinity,
    At(f64),
}

/// Support components of F for aspect ratio `y > 0`.
pub fn find_support_layout(y: f64, model: &NoiseSignalModel) -> Result<SupportLayout> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("aspect ratio must be positive, got {y}")));
    }
    let poles = model.poles();
    let g = |a: f64| g_raw(a, y, &poles);
    // phi = 1 - g, phi' = -g'
    let phi = |a: f64| {
        let (d1, _) = g_derivs(a, y, &poles);
        (1.0 - g(a), -d1)
    };
    let pole_pos: Vec<f64> = poles.iter().map(|&(c, _)| -c).collect();

    // Alternating sequence: region start (f local max or -inf), region end (f local min), ...
    let mut seq: Vec<Bound> = Vec::new();
    let first_pole = pole_pos[0];
    if y < 1.0 {
        // g increases from y at -inf to +inf at the first pole
        let mut far = first_pole - 1.0f64.max(first_pole.abs());
        while g(far) >= 1.0 {
            far = first_pole - 2.0 * (first_pole - far);
            if !far.is_finite() {
                return Err(Error::NoConvergence {
                    what: "left support edge bracket",
                    iterations: 0,
                    last_x: far,
                    residual: g(far) - 1.0,
                });
            }
        }
        let near = probe_toward(&mut |a| (g(a), 0.0), first_pole, far, |v| v > 1.0)?;
        let tol = ALPHA_TOL * far.abs();
        seq.push(Bound::At(newton_bisect(phi, far, near, tol)?));
    } else {
        seq.push(Bound::MinusInfinity);
    }

    for w in pole_pos.windows(2) {
        let (a, b) = (w[0], w[1]);
        let tol = ALPHA_TOL * a.abs();
        let amin = convex_argmin(|x| g_derivs(x, y, &poles), a, b, tol)?;
        if g(amin) < 1.0 {
            let left = probe_toward(&mut |x| (g(x), 0.0), a, amin, |v| v > 1.0)?;
            let right = probe_toward(&mut |x| (g(x), 0.0), b, amin, |v| v > 1.0)?;
            seq.push(Bound::At(newton_bisect(phi, left, amin, tol)?));
            seq.push(Bound::At(newton_bisect(phi, amin, right, tol)?));
        }
    }

    // g decreases from +inf at the last pole to 0 at the origin
    let last_pole = *pole_pos.last().unwrap();
    let inner = probe_toward(&mut |x| (g(x), 0.0), 0.0, last_pole, |v| v < 1.0)?;
    let outer = probe_toward(&mut |x| (g(x), 0.0), last_pole, inner, |v| v > 1.0)?;
    seq.push(Bound::At(newton_bisect(
        phi,
        outer,
        inner,
        ALPHA_TOL * last_pole.abs(),
    )?));

    debug_assert_eq!(seq.len() % 2, 0);

    let atom_at_zero = if y > 1.0 { 1.0 - 1.0 / y } else { 0.0 };
    let leftmost_lo = if y > 1.0 {
        // f has a single maximum on the positive axis; it is the left edge
        let mut hi = 1.0 / poles[0].0;
        while g(hi) <= 1.0 {
            hi *= 2.0;
        }
        let lo = probe_toward(&mut |x| (g(x), 0.0), 0.0, hi, |v| v < 1.0)?;
        let a = newton_bisect(phi, lo, hi, ALPHA_TOL * hi)?;
        f_raw(a, y, &poles)
    } else {
        0.0
    };

    let mut intervals = Vec::with_capacity(seq.len() / 2);
    let mut enclosed = Vec::with_capacity(seq.len() / 2);
    for pair in seq.chunks(2) {
        let Bound::At(end) = pair[1] else {
            unreachable!("region ends are always finite");
        };
        let (lo, start) = match pair[0] {
            Bound::MinusInfinity => (leftmost_lo, f64::NEG_INFINITY),
            Bound::At(a) => (f_raw(a, y, &poles), a),
        };
        let hi = f_raw(end, y, &poles);
        let weight: f64 = poles
            .iter()
            .filter(|&&(c, _)| -c > start && -c < end)
            .map(|&(_, h)| h)
            .sum();
        let count = poles.iter().filter(|&&(c, _)| -c > start && -c < end).count();
        intervals.push(SupportInterval {
            lo: lo.max(0.0),
            hi,
            mass: weight,
        });
        enclosed.push(count);
    }
    let others: f64 = intervals[1..].iter().map(|i| i.mass).sum();
    intervals[0].mass = 1.0 - atom_at_zero - others;
    let noise_separated = model.y1() > 0.0 && enclosed[0] == 1;

    Ok(SupportLayout {
        atom_at_zero,
        intervals,
        noise_separated,
    })
}

/// Minimizer of `g(.; y = 1)` on `(-1/sigma2, -1/b_1)` and the minimum value.
fn min_g_unit(model: &NoiseSignalModel) -> Result<(f64, f64)> {
    let poles = model.poles();
    let (a, b) = (-poles[0].0, -poles[1].0);
    let alpha = convex_argmin(|x| g_derivs(x, 1.0, &poles), a, b, ALPHA_TOL * a.abs())?;
    Ok((alpha, g_raw(alpha, 1.0, &poles)))
}

/// Whether the noise component splits off, with the minimizer of g between
/// the noise pole and the smallest signal pole. A pure-noise model never
/// splits and reports `NaN` as the minimizer.
pub fn split_exists(y: f64, model: &NoiseSignalModel) -> Result<(bool, f64)> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("aspect ratio must be positive, got {y}")));
    }
    if model.y1() == 0.0 {
        return Ok((false, f64::NAN));
    }
    let (alpha, gmin) = min_g_unit(model)?;
    Ok((y * gmin < 1.0, alpha))
}

/// Largest aspect ratio for which the noise component splits off, using
/// that g is linear in y. Infinite for a pure-noise model.
pub fn critical_y(model: &NoiseSignalModel) -> Result<f64> {
    if model.y1() == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / min_g_unit(model)?.1)
}

fn check_single_spike(y1: f64, sigma2: f64, b: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !(b > sigma2) {
        return Err(Error::domain(format!(
            "single spike needs b > sigma2 > 0, got b = {b}, sigma2 = {sigma2}"
        )));
    }
    if !(y1 > 0.0 && y1 < 1.0) {
        return Err(Error::domain(format!("signal fraction must lie in (0, 1), got {y1}")));
    }
    Ok(())
}

/// Closed-form critical ratio for a single signal atom:
/// `(b - sigma2)^2 / ((b^2 y1)^(1/3) + (sigma2^2 (1 - y1))^(1/3))^3`.
pub fn single_spike_critical_y(y1: f64, sigma2: f64, b: f64) -> Result<f64> {
    check_single_spike(y1, sigma2, b)?;
    let s = (b * b * y1).cbrt() + (sigma2 * sigma2 * (1.0 - y1)).cbrt();
    Ok((b - sigma2).powi(2) / (s * s * s))
}

/// Closed-form split test for a single signal atom.
pub fn single_spike_split(y: f64, y1: f64, sigma2: f64, b: f64) -> Result<bool> {
    check_single_spike(y1, sigma2, b)?;
    if !(y > 0.0) {
        return Err(Error::domain(format!("aspect ratio must be positive, got {y}")));
    }
    let s = (b * b * y1).cbrt() + (sigma2 * sigma2 * (1.0 - y1)).cbrt();
    Ok(y * s * s * s / (b - sigma2).powi(2) < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike(b: f64, y1: f64) -> NoiseSignalModel {
        NoiseSignalModel::single_spike(1.0, y1, b).unwrap()
    }

    #[test]
    fn f_examples() {
        let noise = NoiseSignalModel::pure_noise(1.0);
        assert!((f_alpha(-2.0, 0.25, &noise).unwrap() - 0.25).abs() < 1e-15);
        assert!((f_alpha(-2.0 / 3.0, 0.25, &noise).unwrap() - 2.25).abs() < 1e-14);
        assert_eq!(f_alpha(-0.37, 0.0, &noise).unwrap(), 1.0 / 0.37);
        let m = NoiseSignalModel::single_spike(1.0, 0.5, 4.0).unwrap();
        assert!((f_alpha(-0.5, 0.1, &m).unwrap() - 1.9).abs() < 1e-14);
    }

    #[test]
    fn g_examples() {
        let noise = NoiseSignalModel::pure_noise(1.0);
        assert_eq!(g_alpha(-2.0, 0.25, &noise).unwrap(), 1.0);
        assert_eq!(g_alpha(-3.0, 0.0, &spike(5.0, 0.2)).unwrap(), 0.0);
    }

    #[test]
    fn poles_are_domain_errors() {
        let m = spike(4.0, 0.5);
        for a in [0.0, -1.0, -0.25] {
            assert!(matches!(f_alpha(a, 0.1, &m), Err(Error::Domain(_))));
        }
        assert!(g_alpha(-0.25, 0.1, &m).is_err());
        assert!(g_alpha(0.0, 0.1, &m).is_ok());
    }

    #[test]
    fn pure_noise_layouts() {
        let m = NoiseSignalModel::pure_noise(1.0);
        let l = find_support_layout(0.25, &m).unwrap();
        assert_eq!(l.intervals.len(), 1);
        assert!((l.intervals[0].lo - 0.25).abs() < 1e-12);
        assert!((l.intervals[0].hi - 2.25).abs() < 1e-12);
        assert_eq!(l.intervals[0].mass, 1.0);
        assert!(!l.noise_separated);

        let l = find_support_layout(4.0, &m).unwrap();
        assert_eq!(l.atom_at_zero, 0.75);
        assert!((l.intervals[0].lo - 1.0).abs() < 1e-12);
        assert!((l.intervals[0].hi - 9.0).abs() < 1e-12);
        assert!((l.intervals[0].mass - 0.25).abs() < 1e-15);

        let l = find_support_layout(1.0, &m).unwrap();
        assert_eq!(l.intervals[0].lo, 0.0);
        assert!((l.intervals[0].hi - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_spike_two_components() {
        let m = NoiseSignalModel::single_spike(1.0, 0.1, 5.0).unwrap();
        let l = find_support_layout(0.05, &m).unwrap();
        assert_eq!(l.intervals.len(), 2);
        assert!(l.noise_separated);
        assert!((l.intervals[0].mass - 0.9).abs() < 1e-15);
        assert!((l.intervals[1].mass - 0.1).abs() < 1e-15);
        let [a, b] = [l.intervals[0], l.intervals[1]];
        assert!(a.lo < 1.0 && 1.0 < a.hi && a.hi < b.lo && b.lo < 5.0 && 5.0 < b.hi);

        let tight = find_support_layout(0.005, &m).unwrap();
        let [c, d] = [tight.intervals[0], tight.intervals[1]];
        assert!(c.lo > a.lo && c.hi < a.hi && d.lo > b.lo && d.hi < b.hi);
    }

    #[test]
    fn split_above_unit_ratio() {
        // critical ratio is about 1.2769 for this spike
        let m = spike(5.0, 0.1);
        let l = find_support_layout(1.1, &m).unwrap();
        assert!((l.atom_at_zero - (1.0 - 1.0 / 1.1)).abs() < 1e-15);
        assert_eq!(l.intervals.len(), 2);
        assert!((l.intervals[0].mass - (1.0 / 1.1 - 0.1)).abs() < 1e-12);
        assert!((l.intervals[1].mass - 0.1).abs() < 1e-15);
        let l = find_support_layout(1.0, &m).unwrap();
        assert_eq!(l.intervals[0].lo, 0.0);
        assert!((l.intervals[0].mass - 0.9).abs() < 1e-12);
        let l = find_support_layout(1.4, &m).unwrap();
        assert_eq!(l.intervals.len(), 1);
        assert!(!l.noise_separated);
    }

    #[test]
    fn critical_ratio_closed_form() {
        let y = critical_y(&spike(5.0, 0.1)).unwrap();
        assert!((y - 1.276_855_161_857_401_8).abs() < 1e-12);
        assert!((single_spike_critical_y(0.1, 1.0, 5.0).unwrap() - y).abs() < 1e-12);
        assert!(single_spike_split(1.0, 0.1, 1.0, 5.0).unwrap());
        assert!(!single_spike_split(1.28, 0.1, 1.0, 5.0).unwrap());
        assert!(single_spike_split(1.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_pure_noise_split() {
        let m = NoiseSignalModel::pure_noise(2.0);
        let (split, alpha) = split_exists(0.1, &m).unwrap();
        assert!(!split && alpha.is_nan());
        assert_eq!(critical_y(&m).unwrap(), f64::INFINITY);
    }

    #[test]
    fn model_validation() {
        assert!(NoiseSignalModel::new(1.0, 0.2, vec![(0.5, 1.0)]).is_err());
        assert!(NoiseSignalModel::new(1.0, 0.2, vec![(3.0, 0.5), (2.0, 0.5)]).is_err());
        assert!(NoiseSignalModel::new(1.0, 0.0, vec![(3.0, 1.0)]).is_err());
        assert!(NoiseSignalModel::new(1.0, 0.2, vec![(3.0, 0.4)]).is_err());
        assert!(NoiseSignalModel::new(-1.0, 0.0, vec![]).is_err());
    }

    #[test]
    fn model_from_population_spectrum() {
        let spec = DiscreteSpectrum::new(vec![1.0, 1.0, 1.0 + 1e-12, 4.0, 4.0, 9.0]).unwrap();
        let m = NoiseSignalModel::from_population_spectrum(&spec, 1.0).unwrap();
        assert_eq!(m.y1(), 0.5);
        assert_eq!(m.signal_atoms().len(), 2);
        assert!((m.signal_atoms()[0].1 - 2.0 / 3.0).abs() < 1e-15);
        let bad = DiscreteSpectrum::new(vec![0.5, 1.0]).unwrap();
        assert!(NoiseSignalModel::from_population_spectrum(&bad, 1.0).is_err());
    }

    #[test]
    fn endpoints_csv() {
        let m = spike(5.0, 0.1);
        let rows = vec![
            (0.0, Endpoints::at_zero_ratio(&m)),
            (2.0, find_support_layout(2.0, &m).unwrap().endpoints()),
        ];
        let mut out = Vec::new();
        write_endpoints_csv(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "y,x1,x2,x3,x4");
        assert_eq!(lines[1], "0,1,1,5,5");
        assert!(lines[2].starts_with("2,") && lines[2].contains(",,,"));
    }
}
