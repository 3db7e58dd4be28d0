//! Monte Carlo experiment runner and report writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::arraysim::{build_scenario, hermitian_eigenvalues, sample_covariance, snapshots, Scenario, Seed};
use crate::config::ExperimentConfig;
use crate::detect::{detect_blind, detect_model_based, write_detection_csv, DetectionResult, DetectionRow};
use crate::dist::{histogram, log_edges, DiscreteSpectrum};
use crate::moments::{nu_from_mu, spectrum_moments, MomentSequence};
use crate::stieltjes::{default_eta, density_curve, mp_density, write_density_csv};
use crate::support::{critical_y, find_support_layout, write_endpoints_csv, Endpoints, NoiseSignalModel, SupportLayout};
use crate::{Error, Result};

/// Slack around `[x1, x2]` when checking that observed noise eigenvalues sit
/// inside the theoretical noise component.
pub const COVERAGE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct TrialData {
    pub spectrum: DiscreteSpectrum,
    pub blind: DetectionResult,
    pub model_based: Option<DetectionResult>,
    pub moments: MomentSequence,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: Seed,
    pub result: std::result::Result<TrialData, String>,
}

#[derive(Debug, Clone)]
pub struct SettingReport {
    pub n: usize,
    pub y: f64,
    pub layout: std::result::Result<SupportLayout, String>,
    pub trials: Vec<TrialOutcome>,
}

impl SettingReport {
    pub fn split(&self) -> bool {
        matches!(&self.layout, Ok(l) if l.noise_gap().is_some())
    }

    pub fn successes(&self) -> impl Iterator<Item = &TrialData> {
        self.trials.iter().filter_map(|t| t.result.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.result.is_err()).count()
    }

    /// Fraction of all trials where the blind detector found exactly `q`.
    pub fn blind_rate(&self, q: usize) -> f64 {
        let hits = self.successes().filter(|t| t.blind.q_hat == q).count();
        hits as f64 / self.trials.len() as f64
    }

    /// Same for the model-based detector; `None` without a split layout.
    pub fn model_rate(&self, q: usize) -> Option<f64> {
        if !self.split() {
            return None;
        }
        let hits = self
            .successes()
            .filter(|t| t.model_based.is_some_and(|d| d.q_hat == q))
            .count();
        Some(hits as f64 / self.trials.len() as f64)
    }

    /// Fraction of trials whose `p - q` smallest eigenvalues all lie in
    /// `[x1 - COVERAGE_MARGIN, x2 + COVERAGE_MARGIN]`.
    pub fn noise_coverage(&self, p: usize, q: usize) -> Option<f64> {
        let layout = self.layout.as_ref().ok()?;
        let (x2, _) = layout.noise_gap()?;
        let x1 = layout.intervals[0].lo;
        let hits = self
            .successes()
            .filter(|t| {
                t.spectrum.values()[..p - q]
                    .iter()
                    .all(|&v| v >= x1 - COVERAGE_MARGIN && v <= x2 + COVERAGE_MARGIN)
            })
            .count();
        Some(hits as f64 / self.trials.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    pub model: NoiseSignalModel,
    pub critical_y: f64,
    pub settings: Vec<SettingReport>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.settings
            .iter()
            .map(|s| s.failures() + usize::from(s.layout.is_err()))
            .sum()
    }
}

fn run_trial(scenario: &Scenario, layout: Option<&SupportLayout>, config: &ExperimentConfig, n: usize, seed: Seed) -> Result<TrialData> {
    let batch = snapshots(scenario, n, seed)?;
    let spectrum = hermitian_eigenvalues(&sample_covariance(&batch))?;
    let blind = detect_blind(&spectrum, config.min_noise_fraction)?;
    let model_based = match layout {
        Some(l) if l.noise_gap().is_some() => Some(detect_model_based(&spectrum, l)?),
        _ => None,
    };
    let moments = spectrum_moments(&spectrum, config.moment_order)?;
    Ok(TrialData {
        spectrum,
        blind,
        model_based,
        moments,
    })
}

/// Stream of trial `trial` at sample size `n`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> Seed {
    Seed::for_trial(master, n as u32, trial as u32)
}

/// Builds the scenario, computes the theoretical layout for every sample
/// size and runs all trials on `jobs` threads. Results do not depend on
/// `jobs`. Failures of single trials are recorded, not propagated.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport> {
    let scenario = build_scenario(&config.scenario_spec())?;
    let model = scenario.model()?;
    let critical = critical_y(&model)?;
    let mut settings: Vec<SettingReport> = config
        .sample_sizes
        .iter()
        .map(|&n| {
            let y = config.p as f64 / n as f64;
            SettingReport {
                n,
                y,
                layout: find_support_layout(y, &model).map_err(|e| e.to_string()),
                trials: Vec::new(),
            }
        })
        .collect();
    let tasks: Vec<(usize, usize)> = (0..settings.len())
        .flat_map(|s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, trial)| {
                let setting = &settings[s];
                let seed = trial_seed(config.seed, setting.n, trial);
                let result = run_trial(&scenario, setting.layout.as_ref().ok(), config, setting.n, seed)
                    .map_err(|e| e.to_string());
                TrialOutcome { trial, seed, result }
            })
            .collect()
    });
    for ((s, _), outcome) in tasks.into_iter().zip(outcomes) {
        settings[s].trials.push(outcome);
    }
    Ok(ExperimentReport {
        config: config.clone(),
        scenario,
        model,
        critical_y: critical,
        settings,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn fmt_opt(v: Option<f64>, width: usize, prec: usize) -> String {
    match v {
        Some(x) => format!("{x:>width$.prec$}"),
        None => format!("{:>width$}", "-"),
    }
}

/// Endpoint rows in decreasing `y`, ending with the `y -> 0` limit.
pub fn endpoint_rows(model: &NoiseSignalModel, ys: &[f64]) -> Result<Vec<(f64, Endpoints)>> {
    let mut ys = ys.to_vec();
    ys.sort_by(|a, b| b.total_cmp(a));
    ys.dedup();
    let mut rows = ys
        .iter()
        .map(|&y| Ok((y, find_support_layout(y, model)?.endpoints())))
        .collect::<Result<Vec<_>>>()?;
    rows.push((0.0, Endpoints::at_zero_ratio(model)));
    Ok(rows)
}

/// Writes `endpoints.csv` and the aligned `endpoints.txt`.
pub fn write_endpoint_tables(dir: &Path, rows: &[(f64, Endpoints)]) -> Result<()> {
    write_endpoints_csv(create(dir, "endpoints.csv")?, rows)?;
    let mut w = create(dir, "endpoints.txt")?;
    w.write_all(endpoint_table(rows).as_bytes())?;
    Ok(())
}

pub fn endpoint_table(rows: &[(f64, Endpoints)]) -> String {
    let mut s = format!("{:>10} {:>12} {:>12} {:>12} {:>12}\n", "y", "x1", "x2", "x3", "x4");
    for (y, e) in rows {
        s.push_str(&format!(
            "{y:>10.6} {:>12.4} {} {} {:>12.4}\n",
            e.x1,
            fmt_opt(e.x2, 12, 4),
            fmt_opt(e.x3, 12, 4),
            e.x4
        ));
    }
    s
}

fn write_spectra(dir: &Path, setting: &SettingReport, population: &DiscreteSpectrum) -> Result<()> {
    let p = population.len();
    let mut csv = create(dir, &format!("spectra_n{}.csv", setting.n))?;
    let mut txt = create(dir, &format!("spectra_n{}.txt", setting.n))?;
    let mut header = vec!["k".to_string()];
    header.extend(setting.trials.iter().map(|t| format!("trial_{}", t.trial + 1)));
    header.push("population".into());
    writeln!(csv, "{}", header.join(","))?;
    write!(txt, "{:>4}", "k")?;
    for t in &setting.trials {
        write!(txt, " {:>9}", format!("L{}", t.trial + 1))?;
    }
    writeln!(txt, " {:>10}", "R")?;
    for k in 0..p {
        let mut row = vec![(k + 1).to_string()];
        write!(txt, "{:>4}", k + 1)?;
        for t in &setting.trials {
            match &t.result {
                Ok(d) => {
                    row.push(d.spectrum.values()[k].to_string());
                    write!(txt, " {:>9.2}", d.spectrum.values()[k])?;
                }
                Err(_) => {
                    row.push(String::new());
                    write!(txt, " {:>9}", "-")?;
                }
            }
        }
        row.push(population.values()[k].to_string());
        writeln!(csv, "{}", row.join(","))?;
        writeln!(txt, " {:>10.2}", population.values()[k])?;
    }
    Ok(())
}

fn write_histogram(dir: &Path, setting: &SettingReport, bins: usize) -> Result<()> {
    let pooled: Vec<f64> = setting
        .successes()
        .flat_map(|t| t.spectrum.values().iter().copied())
        .collect();
    if pooled.is_empty() {
        return Ok(());
    }
    let pooled = DiscreteSpectrum::new(pooled)?;
    let h = histogram(&pooled, &log_edges(&pooled, bins)?)?;
    h.write_csv(create(dir, &format!("histogram_n{}.csv", setting.n))?)
}

fn write_moments(dir: &Path, report: &ExperimentReport) -> Result<()> {
    let order = report.config.moment_order;
    let mu = spectrum_moments(&report.scenario.true_spectrum, order)?;
    let mut w = create(dir, "moments.csv")?;
    writeln!(w, "n,y,k,theory,observed_mean")?;
    for s in &report.settings {
        let nu = nu_from_mu(&mu, s.y)?;
        let ok: Vec<&TrialData> = s.successes().collect();
        for k in 1..=order {
            let mean = if ok.is_empty() {
                String::new()
            } else {
                (ok.iter().map(|t| t.moments.get(k)).sum::<f64>() / ok.len() as f64).to_string()
            };
            writeln!(w, "{},{},{k},{},{mean}", s.n, s.y, nu.get(k))?;
        }
    }
    Ok(())
}

fn write_summary(dir: &Path, report: &ExperimentReport) -> Result<()> {
    let (p, q) = (report.config.p, report.scenario.q);
    let mut w = create(dir, "summary.txt")?;
    writeln!(w, "p = {p}, q = {q}, sigma2 = {}", report.config.sigma2)?;
    writeln!(w, "critical aspect ratio = {}", report.critical_y)?;
    if report.critical_y.is_finite() {
        writeln!(w, "smallest n with a split = {}", (p as f64 / report.critical_y).floor() as usize + 1)?;
    }
    writeln!(w, "trials per n = {}, master seed = {}", report.config.trials, report.config.seed)?;
    writeln!(w)?;
    writeln!(
        w,
        "{:>6} {:>10} {:>6} {:>8} {:>8} {:>9} {:>11} {:>9}",
        "n", "y", "split", "blind", "model", "coverage", "sigma2_hat", "failures"
    )?;
    let mut csv = create(dir, "summary.csv")?;
    writeln!(csv, "n,y,split,trials,failures,blind_rate,model_rate,noise_coverage,mean_sigma2_hat")?;
    for s in &report.settings {
        let ok: Vec<&TrialData> = s.successes().collect();
        let mean_sigma2 = (!ok.is_empty()).then(|| ok.iter().map(|t| t.blind.sigma2_hat).sum::<f64>() / ok.len() as f64);
        let model = s.model_rate(q);
        let coverage = s.noise_coverage(p, q);
        writeln!(
            w,
            "{:>6} {:>10.6} {:>6} {:>8.3} {} {} {} {:>9}",
            s.n,
            s.y,
            if s.split() { "yes" } else { "no" },
            s.blind_rate(q),
            fmt_opt(model, 8, 3),
            fmt_opt(coverage, 9, 3),
            fmt_opt(mean_sigma2, 11, 4),
            s.failures()
        )?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            s.n,
            s.y,
            s.split(),
            s.trials.len(),
            s.failures(),
            s.blind_rate(q),
            opt(model),
            opt(coverage),
            opt(mean_sigma2)
        )?;
    }
    Ok(())
}

/// Writes every report file into `dir` and returns their paths.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let population = &report.scenario.true_spectrum;
    let q = report.scenario.q;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for s in &report.settings {
        write_spectra(dir, s, population)?;
        write_histogram(dir, s, report.config.histogram_bins)?;
        if let Err(e) = &s.layout {
            failures.push(format!("n={} layout: {e}", s.n));
        }
        for t in &s.trials {
            match &t.result {
                Ok(d) => {
                    for r in std::iter::once(d.blind).chain(d.model_based) {
                        rows.push(DetectionRow {
                            seed: t.seed.stream,
                            n: s.n,
                            y: s.y,
                            q_true: q,
                            result: r,
                        });
                    }
                }
                Err(e) => failures.push(format!("n={} trial={} stream={}: {e}", s.n, t.trial + 1, t.seed.stream)),
            }
        }
    }
    write_detection_csv(create(dir, "detections.csv")?, &rows)?;
    let ys: Vec<f64> = report
        .settings
        .iter()
        .filter(|s| s.layout.is_ok())
        .map(|s| s.y)
        .collect();
    write_endpoint_tables(dir, &endpoint_rows(&report.model, &ys)?)?;
    write_moments(dir, report)?;
    write_summary(dir, report)?;
    if !failures.is_empty() {
        let mut w = create(dir, "failures.txt")?;
        for f in &failures {
            writeln!(w, "{f}")?;
        }
    }
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    names.sort();
    Ok(names)
}

/// Evaluation grid for a density plot: `points` cosine-spaced nodes per
/// support component, a few evenly spaced points in every gap and just
/// outside the support.
pub fn density_grid(layout: &SupportLayout, points: usize) -> Vec<f64> {
    const GAP_POINTS: usize = 8;
    let mut xs = Vec::new();
    let ivs = &layout.intervals;
    let first = ivs[0];
    let last = ivs[ivs.len() - 1];
    let margin = 0.05 * (last.hi - first.lo);
    let left = (first.lo - margin).max(0.5 * first.lo);
    for j in 0..GAP_POINTS {
        xs.push(left + (first.lo - left) * j as f64 / GAP_POINTS as f64);
    }
    for (i, iv) in ivs.iter().enumerate() {
        let half = 0.5 * (iv.hi - iv.lo);
        for k in 0..=points {
            xs.push(iv.lo + half * (1.0 - (std::f64::consts::PI * k as f64 / points as f64).cos()));
        }
        let next = ivs.get(i + 1).map_or(iv.hi + margin, |n| n.lo);
        for j in 1..GAP_POINTS {
            xs.push(iv.hi + (next - iv.hi) * j as f64 / GAP_POINTS as f64);
        }
    }
    xs.retain(|&x| x > 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Writes `density_{label}.csv` from the Stieltjes inversion and
/// `density_mp_{label}.csv` with the pure-noise law of the same `y` and
/// `sigma2` on the same grid.
pub fn emit_density_curve(dir: &Path, label: &str, y: f64, model: &NoiseSignalModel, points: usize) -> Result<Vec<PathBuf>> {
    let layout = find_support_layout(y, model)?;
    let xs = density_grid(&layout, points);
    let lo = layout.intervals[0].lo;
    let hi = layout.intervals[layout.intervals.len() - 1].hi;
    let eta = layout
        .intervals
        .iter()
        .map(|iv| default_eta(iv.lo, iv.hi))
        .fold(default_eta(lo, hi), f64::min);
    let mut density = density_curve(&xs, y, model, eta)?;
    // Smoothing leaves O(sqrt(eta)) at the square-root edges; F' is zero off the open support.
    for (d, &x) in density.iter_mut().zip(&xs) {
        if !layout.intervals.iter().any(|iv| x > iv.lo && x < iv.hi) {
            *d = 0.0;
        }
    }
    let mp: Vec<f64> = xs.iter().map(|&x| mp_density(x, y, model.sigma2())).collect();
    fs::create_dir_all(dir)?;
    let a = dir.join(format!("density_{label}.csv"));
    let b = dir.join(format!("density_mp_{label}.csv"));
    write_density_csv(BufWriter::new(File::create(&a)?), &xs, &density)?;
    write_density_csv(BufWriter::new(File::create(&b)?), &xs, &mp)?;
    Ok(vec![a, b])
}
