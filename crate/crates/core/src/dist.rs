//! Empirical and limiting distribution functions.
//!
//! A [`StepDF`] is a mixed distribution: finitely many atoms plus an optional
//! absolutely continuous part stored as a CDF sampled on a grid and linearly
//! interpolated between samples. Empirical d.f.s of eigenvalue lists are pure
//! atom collections; limits computed by [`crate::stieltjes`] carry a sampled
//! continuous part and possibly an atom at the origin.

use std::io::Write;

use crate::{Error, Result};

const MASS_TOL: f64 = 1e-12;

/// Sorted list of nonnegative eigenvalues, multiplicities kept.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    values: Vec<f64>,
}

impl DiscreteSpectrum {
    /// Sorts `values` and checks that they are finite and nonnegative.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain(format!(
                "spectrum values must be finite and nonnegative, got {bad}"
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Every eigenvalue multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0, "scale factor must be positive");
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Distinct values with their multiplicities, in increasing order.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((last, count)) if *last == v => *count += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Continuous part of a [`StepDF`]: CDF samples with linear interpolation.
///
/// The sampled CDF starts at 0 on `grid[0]` and is constant at its last value
/// to the right of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl SampledCdf {
    pub fn new(grid: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if grid.len() != cdf.len() || grid.len() < 2 {
            return Err(Error::domain(
                "sampled CDF needs at least two points and matching lengths",
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("CDF grid must be strictly increasing"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("CDF samples must be nondecreasing"));
        }
        if cdf[0].abs() > MASS_TOL || cdf.iter().any(|c| !(0.0..=1.0 + MASS_TOL).contains(c)) {
            return Err(Error::domain("CDF samples must start at 0 and lie in [0, 1]"));
        }
        Ok(Self { grid, cdf })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return 0.0;
        }
        if x >= g[g.len() - 1] {
            return self.mass();
        }
        let i = g.partition_point(|&v| v <= x) - 1;
        let t = (x - g[i]) / (g[i + 1] - g[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    fn max_increment(&self) -> f64 {
        self.cdf
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Right-continuous distribution function: atoms plus an optional sampled
/// continuous part.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDF {
    atoms: Vec<(f64, f64)>,
    /// `prefix[k]` = mass of the first `k` atoms.
    prefix: Vec<f64>,
    continuous: Option<SampledCdf>,
}

fn prefix_sums(atoms: &[(f64, f64)]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(atoms.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for a in atoms {
        acc += a.1;
        prefix.push(acc);
    }
    prefix
}

impl StepDF {
    /// Atoms are sorted and merged by location. Total mass must be 1.
    pub fn new(mut atoms: Vec<(f64, f64)>, continuous: Option<SampledCdf>) -> Result<Self> {
        if atoms
            .iter()
            .any(|&(x, m)| !x.is_finite() || !(m >= 0.0) || !m.is_finite())
        {
            return Err(Error::domain("atoms need finite locations and nonnegative masses"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some((lx, lm)) if *lx == x => *lm += m,
                _ => merged.push((x, m)),
            }
        }
        merged.retain(|&(_, m)| m > 0.0);
        let total: f64 = merged.iter().map(|a| a.1).sum::<f64>()
            + continuous.as_ref().map_or(0.0, SampledCdf::mass);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("total mass {total} differs from 1")));
        }
        let mut prefix = prefix_sums(&merged);
        if continuous.is_none() {
            // purely atomic: make F reach 1 exactly
            let last = prefix[prefix.len() - 1];
            prefix.iter_mut().for_each(|v| *v /= last);
        }
        Ok(Self {
            atoms: merged,
            prefix,
            continuous,
        })
    }

    /// Single atom of mass one.
    pub fn point_mass(x: f64) -> Self {
        Self {
            atoms: vec![(x, 1.0)],
            prefix: vec![0.0, 1.0],
            continuous: None,
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn continuous_part(&self) -> Option<&SampledCdf> {
        self.continuous.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.prefix[self.prefix.len() - 1] + self.continuous.as_ref().map_or(0.0, SampledCdf::mass)
    }

    /// F(x), including any atom located at x.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.0 <= x);
        (self.prefix[k] + self.continuous.as_ref().map_or(0.0, |c| c.eval(x))).min(1.0)
    }

    /// F(x-), excluding any atom located at x.
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.0 < x);
        (self.prefix[k] + self.continuous.as_ref().map_or(0.0, |c| c.eval(x))).min(1.0)
    }

    /// Atom locations and grid points, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        if let Some(c) = &self.continuous {
            pts.extend_from_slice(c.grid());
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Largest CDF increment between adjacent grid samples (0 without a continuous part).
    pub fn max_grid_increment(&self) -> f64 {
        self.continuous.as_ref().map_or(0.0, SampledCdf::max_increment)
    }

    /// Writes `x,cdf` rows at every breakpoint. At an atom the left limit is
    /// written first, so plotting the rows in order draws the jump.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,cdf")?;
        for x in self.breakpoints() {
            let (left, right) = (self.eval_left(x), self.eval(x));
            if left != right {
                writeln!(w, "{x},{left}")?;
            }
            writeln!(w, "{x},{right}")?;
        }
        Ok(())
    }
}

/// Empirical d.f. of a spectrum: mass 1/m at each eigenvalue.
pub fn empirical_df(spec: &DiscreteSpectrum) -> Result<StepDF> {
    if spec.is_empty() {
        return Err(Error::domain("empirical d.f. of an empty spectrum"));
    }
    let m = spec.len();
    let distinct = spec.distinct();
    let atoms = distinct.iter().map(|&(x, k)| (x, k as f64 / m as f64)).collect();
    let mut df = StepDF::new(atoms, None)?;
    // exact counts: F = (number of eigenvalues <= x) / m
    let mut count = 0;
    for (j, &(_, k)) in distinct.iter().enumerate() {
        count += k;
        df.prefix[j + 1] = count as f64 / m as f64;
    }
    Ok(df)
}

/// Kolmogorov distance together with the interpolation error bound of any
/// sampled continuous parts involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovDistance {
    pub distance: f64,
    pub interpolation_bound: f64,
}

/// sup over x of |F1(x) - F2(x)|.
///
/// Both functions are piecewise linear (or constant) between the union of
/// their breakpoints, so checking right values and left limits at every
/// breakpoint is exact for the interpolated representation.
pub fn sup_distance(f1: &StepDF, f2: &StepDF) -> f64 {
    sup_distance_with_bound(f1, f2).distance
}

pub fn sup_distance_with_bound(f1: &StepDF, f2: &StepDF) -> KolmogorovDistance {
    let mut pts = f1.breakpoints();
    pts.extend(f2.breakpoints());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let distance = pts
        .iter()
        .map(|&x| {
            let right = (f1.eval(x) - f2.eval(x)).abs();
            let left = (f1.eval_left(x) - f2.eval_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max);
    KolmogorovDistance {
        distance,
        interpolation_bound: f1.max_grid_increment().max(f2.max_grid_increment()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_lo,bin_hi,count` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_lo,bin_hi,count")?;
        for (e, c) in self.bin_edges.windows(2).zip(&self.counts) {
            writeln!(w, "{},{},{}", e[0], e[1], c)?;
        }
        Ok(())
    }
}

/// Counts eigenvalues in half-open bins `[e_i, e_{i+1})`; the last bin is closed.
pub fn histogram(spec: &DiscreteSpectrum, edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("histogram edges must be strictly increasing"));
    }
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let mut counts = vec![0u64; edges.len() - 1];
    for &v in spec.values() {
        if v < lo || v > hi {
            return Err(Error::domain(format!(
                "eigenvalue {v} outside histogram range [{lo}, {hi}]"
            )));
        }
        let bin = (edges.partition_point(|&e| e <= v) - 1).min(counts.len() - 1);
        counts[bin] += 1;
    }
    Ok(Histogram {
        bin_edges: edges.to_vec(),
        counts,
    })
}

/// `bins` log-spaced edges covering a spectrum; the first edge is 0 when the
/// spectrum touches 0.
pub fn log_edges(spec: &DiscreteSpectrum, bins: usize) -> Result<Vec<f64>> {
    let (Some(min), Some(max)) = (spec.min(), spec.max()) else {
        return Err(Error::domain("cannot bin an empty spectrum"));
    };
    if bins == 0 {
        return Err(Error::domain("need at least one bin"));
    }
    let smallest_positive = spec.values().iter().copied().find(|&v| v > 0.0);
    let Some(lo) = smallest_positive else {
        return Ok((0..=bins).map(|i| i as f64).collect());
    };
    let hi = if max > lo { max } else { lo * 2.0 };
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| (llo + (lhi - llo) * i as f64 / bins as f64).exp())
        .collect();
    edges[0] = if min == 0.0 { 0.0 } else { lo.min(edges[0]) };
    edges[bins] = hi.max(edges[bins]);
    Ok(edges)
}
