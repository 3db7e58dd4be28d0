//! Uniform linear array simulator.
//!
//! Snapshots follow `X(t) = B V(t) + sigma W(t)` with `B = A C`, where `A` is
//! the Vandermonde steering matrix of a half-wavelength array, `C` a banded
//! nonsingular mixing matrix and `V`, `W` standardized complex Gaussian
//! (real and imaginary parts i.i.d. with variance 1/2). The population
//! covariance is `R = B B* + sigma2 I`.

mod jacobi;

pub use jacobi::jacobi_eigenvalues;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dist::DiscreteSpectrum;
use crate::support::NoiseSignalModel;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const MIXING_ATTEMPTS: usize = 10;

/// Reproducible random stream: a master seed plus a stream index. Every
/// Monte Carlo trial draws from its own stream, so results do not depend on
/// the order in which trials run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Stream index for trial `trial` of setting `setting`.
    pub fn for_trial(master: u64, setting: u32, trial: u32) -> Self {
        Self::new(master, (u64::from(setting) << 32) | u64::from(trial))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Self::new(master, 0)
    }
}

/// Standardized complex Gaussian draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows x cols` matrix of i.i.d. standardized complex Gaussians, filled column by column.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// `A[k, i] = exp(-i pi k sin(theta_i))` for sensors `k = 0..p`.
pub fn steering_matrix(angles: &[f64], p: usize) -> CMatrix {
    CMatrix::from_fn(p, angles.len(), |k, i| {
        Complex64::from_polar(1.0, -PI * k as f64 * angles[i].sin())
    })
}

/// Evenly spaced arrival angles in radians between two bounds given in degrees.
pub fn uniform_angles(lo_deg: f64, hi_deg: f64, q: usize) -> Vec<f64> {
    match q {
        0 => Vec::new(),
        1 => vec![(0.5 * (lo_deg + hi_deg)).to_radians()],
        _ => (0..q)
            .map(|i| (lo_deg + (hi_deg - lo_deg) * i as f64 / (q - 1) as f64).to_radians())
            .collect(),
    }
}

/// Per-source signal-to-noise ratios in dB.
#[derive(Debug, Clone, PartialEq)]
pub enum SnrProfile {
    /// One value per source.
    List(Vec<f64>),
    /// Drawn uniformly in dB from `[lo, hi]` using the scenario seed.
    Uniform { lo: f64, hi: f64 },
}

/// Everything needed to build a [`Scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub p: usize,
    /// Arrival angles in radians; their count is the source count q.
    pub angles: Vec<f64>,
    pub sigma2: f64,
    pub snr_db: SnrProfile,
    /// Half-width of the band of the mixing matrix (0 = uncorrelated sources).
    pub bandwidth: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn q(&self) -> usize {
        self.angles.len()
    }
}

/// Population side of an array experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub p: usize,
    pub q: usize,
    pub angles: Vec<f64>,
    pub steering: CMatrix,
    pub mixing: CMatrix,
    /// `B = A C`, p x q.
    pub b: CMatrix,
    pub sigma2: f64,
    pub snr_db: Vec<f64>,
    /// `R = B B* + sigma2 I`.
    pub covariance: CMatrix,
    pub true_spectrum: DiscreteSpectrum,
    covariance_sqrt: CMatrix,
}

impl Scenario {
    /// Scenario from an explicit `B` (p x q).
    pub fn from_b(b: CMatrix, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::domain(format!("noise power must be positive, got {sigma2}")));
        }
        let (p, q) = b.shape();
        if q >= p {
            return Err(Error::domain(format!("need fewer sources than sensors, got q = {q}, p = {p}")));
        }
        let covariance = &b * b.adjoint() + CMatrix::identity(p, p) * Complex64::new(sigma2, 0.0);
        let eig = nalgebra::SymmetricEigen::new(hermitian_part(&covariance));
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let sqrt_diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p,
            values.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
        ));
        let covariance_sqrt = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        Ok(Self {
            p,
            q,
            angles: Vec::new(),
            steering: CMatrix::zeros(p, q),
            mixing: CMatrix::identity(q, q),
            b,
            sigma2,
            snr_db: Vec::new(),
            covariance,
            true_spectrum: DiscreteSpectrum::new(values)?,
            covariance_sqrt,
        })
    }

    /// No sources: `R = sigma2 I`.
    pub fn pure_noise(p: usize, sigma2: f64) -> Result<Self> {
        Self::from_b(CMatrix::zeros(p, 0), sigma2)
    }

    /// Population spectrum H as a noise-plus-signal model.
    pub fn model(&self) -> Result<NoiseSignalModel> {
        NoiseSignalModel::from_population_spectrum(&self.true_spectrum, self.sigma2)
    }

    /// Hermitian square root of R.
    pub fn covariance_sqrt(&self) -> &CMatrix {
        &self.covariance_sqrt
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn banded_mixing<R: Rng + ?Sized>(rng: &mut R, q: usize, bandwidth: usize) -> CMatrix {
    let mut c = CMatrix::zeros(q, q);
    for j in 0..q {
        for i in 0..q {
            if i.abs_diff(j) <= bandwidth {
                c[(i, j)] = complex_gaussian(rng);
            }
        }
    }
    // strict diagonal dominance by shifting the diagonal
    let bound = (0..q)
        .map(|i| (0..q).filter(|&j| j != i).map(|j| c[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    for i in 0..q {
        c[(i, i)] += Complex64::new(2.0 * bound, 0.0);
    }
    c
}

/// Builds the scenario: steering matrix, seeded banded mixing matrix with
/// rows scaled so that source j has power `(C C*)_jj = sigma2 10^(snr_j/10)`,
/// then `B`, `R` and the spectrum of `R`.
pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    let (p, q) = (spec.p, spec.q());
    if q >= p {
        return Err(Error::domain(format!("need fewer sources than sensors, got q = {q}, p = {p}")));
    }
    if spec.angles.iter().any(|a| !(a.abs() < PI / 2.0)) {
        return Err(Error::domain("arrival angles must lie in (-pi/2, pi/2)"));
    }
    let snr_db = match &spec.snr_db {
        SnrProfile::List(v) => {
            if v.len() != q {
                return Err(Error::domain(format!(
                    "got {} SNR values for {q} sources",
                    v.len()
                )));
            }
            v.clone()
        }
        SnrProfile::Uniform { lo, hi } => {
            if !(lo <= hi) {
                return Err(Error::domain("SNR range must satisfy lo <= hi"));
            }
            let mut rng = Seed::new(spec.seed, 1).rng();
            (0..q).map(|_| rng.random_range(*lo..=*hi)).collect()
        }
    };
    let steering = steering_matrix(&spec.angles, p);
    let mut rng = Seed::new(spec.seed, 0).rng();
    let mut mixing = None;
    for _ in 0..MIXING_ATTEMPTS {
        let mut c = banded_mixing(&mut rng, q, spec.bandwidth);
        for (i, snr) in snr_db.iter().enumerate() {
            let target = spec.sigma2 * 10f64.powf(snr / 10.0);
            let power: f64 = c.row(i).iter().map(|v| v.norm_sqr()).sum();
            c.row_mut(i).scale_mut((target / power).sqrt());
        }
        let hadamard: f64 = (0..q).map(|i| c.row(i).norm()).product();
        if q == 0 || c.clone().lu().determinant().norm() > 1e-12 * hadamard {
            mixing = Some(c);
            break;
        }
    }
    let mixing = mixing.ok_or_else(|| {
        Error::domain(format!(
            "mixing matrix stayed singular after {MIXING_ATTEMPTS} attempts"
        ))
    })?;
    let b = &steering * &mixing;
    let mut scenario = Scenario::from_b(b, spec.sigma2)?;
    scenario.angles = spec.angles.clone();
    scenario.steering = steering;
    scenario.mixing = mixing;
    scenario.snr_db = snr_db;
    Ok(scenario)
}

/// `n` snapshots as the columns of a p x n matrix.
#[derive(Debug, Clone)]
pub struct SnapshotBatch {
    pub x: CMatrix,
    pub n: usize,
    pub seed: Seed,
}

/// Draws `X = B V + sigma W` column by column from `seed`.
pub fn snapshots(scenario: &Scenario, n: usize, seed: Seed) -> Result<SnapshotBatch> {
    if n == 0 {
        return Err(Error::domain("need at least one snapshot"));
    }
    let mut rng = seed.rng();
    let (p, q) = (scenario.p, scenario.q);
    let sigma = scenario.sigma2.sqrt();
    let mut v = CMatrix::zeros(q, n);
    let mut w = CMatrix::zeros(p, n);
    for t in 0..n {
        for i in 0..q {
            v[(i, t)] = complex_gaussian(&mut rng);
        }
        for i in 0..p {
            w[(i, t)] = complex_gaussian(&mut rng);
        }
    }
    let x = &scenario.b * v + w * Complex64::new(sigma, 0.0);
    Ok(SnapshotBatch { x, n, seed })
}

/// `(1/n) X X*`.
pub fn sample_covariance(batch: &SnapshotBatch) -> CMatrix {
    let x = &batch.x;
    let mut r = x * x.adjoint();
    r /= Complex64::new(batch.n as f64, 0.0);
    hermitian_part(&r)
}

/// `(1/n) Y Y* R` with Y p x n standardized complex Gaussian. Not Hermitian,
/// but its eigenvalues are those of the Hermitian `R^(1/2) (1/n) Y Y* R^(1/2)`.
pub fn sample_covariance_equiv(scenario: &Scenario, n: usize, seed: Seed) -> Result<CMatrix> {
    Ok(equiv_gram(scenario, n, seed)? * &scenario.covariance)
}

fn equiv_gram(scenario: &Scenario, n: usize, seed: Seed) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let y = gaussian_matrix(&mut seed.rng(), scenario.p, n);
    let mut s = &y * y.adjoint();
    s /= Complex64::new(n as f64, 0.0);
    Ok(s)
}

/// Spectrum of [`sample_covariance_equiv`] computed through its Hermitian similar.
pub fn sample_covariance_equiv_spectrum(
    scenario: &Scenario,
    n: usize,
    seed: Seed,
) -> Result<DiscreteSpectrum> {
    let s = equiv_gram(scenario, n, seed)?;
    let root = scenario.covariance_sqrt();
    hermitian_eigenvalues(&hermitian_part(&(root * s * root)))
}

/// Real eigenvalues of `A B` for Hermitian nonnegative definite `A`, `B`,
/// through `B^(1/2) A B^(1/2)`.
pub fn product_spectrum(a: &CMatrix, b: &CMatrix) -> Result<DiscreteSpectrum> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(b));
    if eig.eigenvalues.iter().any(|&v| v < -HERMITIAN_TOL * b.norm().max(1.0)) {
        return Err(Error::domain("second factor is not nonnegative definite"));
    }
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        b.nrows(),
        eig.eigenvalues.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    let root = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    hermitian_eigenvalues(&hermitian_part(&(&root * a * &root)))
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain("matrix is not square"));
    }
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let defect = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::domain(format!(
            "matrix is not Hermitian (relative defect {:e})",
            defect / scale
        )));
    }
    Ok(())
}

/// All eigenvalues of a Hermitian matrix, sorted, for any sign pattern.
pub fn hermitian_eigen_raw(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let h = hermitian_part(m);
    let mut values: Vec<f64> = match nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 10_000) {
        Some(e) => e.eigenvalues.iter().copied().collect(),
        None => jacobi_eigenvalues(&hermitian_part(m))?,
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Spectrum of a Hermitian nonnegative definite matrix. Eigenvalues within
/// rounding of zero are clamped to 0.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<DiscreteSpectrum> {
    let values = hermitian_eigen_raw(m)?;
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = -1e-10 * scale.max(f64::MIN_POSITIVE);
    if let Some(v) = values.iter().find(|&&v| v < floor) {
        return Err(Error::domain(format!(
            "matrix is not nonnegative definite (eigenvalue {v})"
        )));
    }
    DiscreteSpectrum::new(values.into_iter().map(|v| v.max(0.0)).collect())
}
