//! Moment map between the population spectrum H and the limiting spectrum F.
//!
//! For M = (1/n) Y Y* T with m/n -> y, the k-th moment of F is
//!
//! ```text
//! nu_k = sum_{w=1..k} y^(k-w) sum k! / (m_1! ... m_w! w!) mu_1^m_1 ... mu_w^m_w
//! ```
//!
//! where the inner sum runs over w-tuples of nonnegative integers with
//! `sum m_i = k - w + 1` and `sum i m_i = k`. The coefficients are exact
//! integers; they are kept as such until the final multiply.

use crate::dist::DiscreteSpectrum;
use crate::{Error, Result};

/// Largest order for which `k!` fits in a `u64`.
pub const MAX_ORDER: usize = 20;

/// Default order used by diagnostics.
pub const DEFAULT_ORDER: usize = 8;

/// Moments `values[k-1] = k-th moment`, `k = 1..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("moment sequence needs order >= 1"));
        }
        if values.len() > MAX_ORDER {
            return Err(Error::domain(format!(
                "moment order {} exceeds the supported maximum {MAX_ORDER}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("moments must be finite"));
        }
        Ok(Self { values })
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// The k-th moment, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One term of the inner sum: coefficient and the multiplicities `m_1..m_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTerm {
    pub w: usize,
    pub multiplicities: Vec<u32>,
    pub coefficient: u64,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All terms contributing to the k-th limiting moment.
pub fn moment_terms(k: usize) -> Vec<MomentTerm> {
    assert!((1..=MAX_ORDER).contains(&k), "order out of range");
    let mut out = Vec::new();
    for w in 1..=k {
        let mut m = vec![0u32; w];
        collect_tuples(k, w, w, k - w + 1, k, &mut m, &mut out);
    }
    out
}

// Fills m[i-1] for i = top, top-1, ..., 1 so that the remaining count and
// weighted sum are used up exactly.
fn collect_tuples(
    k: usize,
    w: usize,
    top: usize,
    count_left: usize,
    weight_left: usize,
    m: &mut [u32],
    out: &mut Vec<MomentTerm>,
) {
    if top == 1 {
        // m_1 is forced by both constraints.
        if count_left == weight_left {
            m[0] = count_left as u32;
            let denom: u128 =
                m.iter().map(|&mi| factorial(mi as usize)).product::<u128>() * factorial(w);
            let num = factorial(k);
            debug_assert_eq!(num % denom, 0);
            out.push(MomentTerm {
                w,
                multiplicities: m.to_vec(),
                coefficient: u64::try_from(num / denom).expect("coefficient fits in u64"),
            });
            m[0] = 0;
        }
        return;
    }
    let max_here = (weight_left / top).min(count_left);
    for mi in 0..=max_here {
        m[top - 1] = mi as u32;
        collect_tuples(
            k,
            w,
            top - 1,
            count_left - mi,
            weight_left - mi * top,
            m,
            out,
        );
    }
    m[top - 1] = 0;
}

fn term_value(term: &MomentTerm, mu: &[f64]) -> f64 {
    term.multiplicities
        .iter()
        .enumerate()
        .filter(|(_, &mi)| mi > 0)
        .map(|(i, &mi)| mu[i].powi(mi as i32))
        .product::<f64>()
        * term.coefficient as f64
}

/// Limiting moments nu_1..nu_K from population moments mu_1..mu_K.
pub fn nu_from_mu(mu: &MomentSequence, y: f64) -> Result<MomentSequence> {
    check_ratio(y)?;
    let order = mu.order();
    let mut nu = Vec::with_capacity(order);
    for k in 1..=order {
        let terms = moment_terms(k);
        let value: f64 = terms
            .iter()
            .map(|t| y.powi((k - t.w) as i32) * term_value(t, mu.values()))
            .sum();
        nu.push(value);
    }
    MomentSequence::new(nu)
}

/// Population moments from limiting moments, by forward substitution: mu_k
/// enters the k-th equation only through the w = k term with coefficient 1.
pub fn mu_from_nu(nu: &MomentSequence, y: f64) -> Result<MomentSequence> {
    check_ratio(y)?;
    let order = nu.order();
    let mut mu = vec![0.0; order];
    for k in 1..=order {
        let rest: f64 = moment_terms(k)
            .iter()
            .filter(|t| t.w != k)
            .map(|t| y.powi((k - t.w) as i32) * term_value(t, &mu))
            .sum();
        mu[k - 1] = nu.get(k) - rest;
    }
    MomentSequence::new(mu)
}

/// `(1/m) sum lambda_i^k` for k = 1..=order.
pub fn spectrum_moments(spec: &DiscreteSpectrum, order: usize) -> Result<MomentSequence> {
    if spec.is_empty() {
        return Err(Error::domain("moments of an empty spectrum"));
    }
    if order == 0 {
        return Err(Error::domain("moment order must be positive"));
    }
    let m = spec.len() as f64;
    let values = (1..=order)
        .map(|k| spec.values().iter().map(|v| v.powi(k as i32)).sum::<f64>() / m)
        .collect();
    MomentSequence::new(values)
}

fn check_ratio(y: f64) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("aspect ratio must be >= 0, got {y}")));
    }
    Ok(())
}
