//! Experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. Recognized keys:
//!
//! | key | value |
//! |-----|-------|
//! | `p` | sensor count |
//! | `q` | source count, optional, must match the angles |
//! | `angles` | degrees, either a comma list or `uniform(lo, hi, q)` |
//! | `sigma2` | noise power |
//! | `snr_db` | comma list (one per source) or `uniform(lo, hi)` |
//! | `bandwidth` | half-width of the mixing band |
//! | `scenario_seed` | seed of the mixing matrix and random SNRs |
//! | `seed` | master seed of the Monte Carlo trials |
//! | `n` | comma list of sample sizes |
//! | `y` | comma list of aspect ratios, converted to `n = round(p / y)` |
//! | `trials` | trials per sample size |
//! | `moment_order` | order of the diagnostic moments |
//! | `min_noise_fraction` | guard of the blind detector |
//! | `histogram_bins` | bins per histogram |
//! | `out` | output directory |
//!
//! A file without `angles` (or with `q = 0`) describes pure noise.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::arraysim::{uniform_angles, ScenarioSpec, SnrProfile};
use crate::detect::DEFAULT_MIN_NOISE_FRACTION;
use crate::moments::{DEFAULT_ORDER, MAX_ORDER};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum AngleSpec {
    /// Degrees.
    List(Vec<f64>),
    /// `q` evenly spaced angles from `lo` to `hi` degrees.
    Uniform { lo: f64, hi: f64, q: usize },
}

impl AngleSpec {
    pub fn count(&self) -> usize {
        match self {
            AngleSpec::List(v) => v.len(),
            AngleSpec::Uniform { q, .. } => *q,
        }
    }

    pub fn radians(&self) -> Vec<f64> {
        match self {
            AngleSpec::List(v) => v.iter().map(|d| d.to_radians()).collect(),
            AngleSpec::Uniform { lo, hi, q } => uniform_angles(*lo, *hi, *q),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: usize,
    pub angles: AngleSpec,
    pub sigma2: f64,
    pub snr_db: SnrProfile,
    pub bandwidth: usize,
    pub scenario_seed: u64,
    pub seed: u64,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub moment_order: usize,
    pub min_noise_fraction: f64,
    pub histogram_bins: usize,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn q(&self) -> usize {
        self.angles.count()
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            p: self.p,
            angles: self.angles.radians(),
            sigma2: self.sigma2,
            snr_db: self.snr_db.clone(),
            bandwidth: self.bandwidth,
            seed: self.scenario_seed,
        }
    }

    /// Renders the configuration in the file grammar; parsing the result gives back `self`.
    pub fn to_config_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "p = {}", self.p);
        if self.q() > 0 {
            let _ = writeln!(s, "q = {}", self.q());
            match &self.angles {
                AngleSpec::List(v) => {
                    let _ = writeln!(s, "angles = {}", list(v));
                }
                AngleSpec::Uniform { lo, hi, q } => {
                    let _ = writeln!(s, "angles = uniform({lo}, {hi}, {q})");
                }
            }
            match &self.snr_db {
                SnrProfile::List(v) => {
                    let _ = writeln!(s, "snr_db = {}", list(v));
                }
                SnrProfile::Uniform { lo, hi } => {
                    let _ = writeln!(s, "snr_db = uniform({lo}, {hi})");
                }
            }
            let _ = writeln!(s, "bandwidth = {}", self.bandwidth);
        }
        let _ = writeln!(s, "sigma2 = {}", self.sigma2);
        let _ = writeln!(s, "scenario_seed = {}", self.scenario_seed);
        let _ = writeln!(s, "seed = {}", self.seed);
        let n: Vec<String> = self.sample_sizes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "n = {}", n.join(", "));
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "moment_order = {}", self.moment_order);
        let _ = writeln!(s, "min_noise_fraction = {}", self.min_noise_fraction);
        let _ = writeln!(s, "histogram_bins = {}", self.histogram_bins);
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        s
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a number, got {:?}", s.trim())))?;
    if !v.is_finite() {
        return Err(err(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a nonnegative integer, got {:?}", s.trim())))
}

fn parse_list<T>(line: usize, key: &str, s: &str, item: impl Fn(usize, &str, &str) -> Result<T>) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|part| item(line, key, part)).collect()
}

/// Arguments of `uniform(...)`, if the value has that form.
fn uniform_args<'a>(line: usize, key: &str, s: &'a str) -> Result<Option<Vec<&'a str>>> {
    let s = s.trim();
    let Some(rest) = s.strip_prefix("uniform") else {
        return Ok(None);
    };
    let inner = rest
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| err(line, format!("{key}: malformed uniform(...)")))?;
    Ok(Some(inner.split(',').collect()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut seen = HashSet::new();
    let mut p = None;
    let mut q: Option<(usize, usize)> = None;
    let mut angles = None;
    let mut sigma2 = 1.0;
    let mut snr: Option<(usize, SnrProfile)> = None;
    let mut bandwidth = 0;
    let mut scenario_seed = 0;
    let mut seed = 0;
    let mut sample_sizes: Option<(usize, Vec<usize>)> = None;
    let mut ratios: Option<(usize, Vec<f64>)> = None;
    let mut trials = 1;
    let mut moment_order = DEFAULT_ORDER;
    let mut min_noise_fraction = DEFAULT_MIN_NOISE_FRACTION;
    let mut histogram_bins = 50;
    let mut out_dir = PathBuf::from("out");

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(err(line, format!("duplicate key {key:?}")));
        }
        match key {
            "p" => p = Some(parse_int::<usize>(line, key, value)?),
            "q" => q = Some((line, parse_int(line, key, value)?)),
            "angles" => {
                angles = Some(match uniform_args(line, key, value)? {
                    Some(args) if args.len() == 3 => AngleSpec::Uniform {
                        lo: parse_f64(line, key, args[0])?,
                        hi: parse_f64(line, key, args[1])?,
                        q: parse_int(line, key, args[2])?,
                    },
                    Some(_) => return Err(err(line, "angles: uniform takes (lo, hi, q)")),
                    None => AngleSpec::List(parse_list(line, key, value, parse_f64)?),
                });
                let a = angles.as_ref().unwrap();
                let (lo, hi) = match a {
                    AngleSpec::List(v) => v.iter().fold((0.0f64, 0.0f64), |(l, h), &x| (l.min(x), h.max(x))),
                    AngleSpec::Uniform { lo, hi, .. } => (lo.min(*hi), lo.max(*hi)),
                };
                if !(lo > -90.0 && hi < 90.0) {
                    return Err(err(line, "angles: degrees must lie in (-90, 90)"));
                }
            }
            "sigma2" => {
                sigma2 = parse_f64(line, key, value)?;
                if !(sigma2 > 0.0) {
                    return Err(err(line, "sigma2 must be positive"));
                }
            }
            "snr_db" => {
                let profile = match uniform_args(line, key, value)? {
                    Some(args) if args.len() == 2 => {
                        let lo = parse_f64(line, key, args[0])?;
                        let hi = parse_f64(line, key, args[1])?;
                        if lo > hi {
                            return Err(err(line, "snr_db: uniform needs lo <= hi"));
                        }
                        SnrProfile::Uniform { lo, hi }
                    }
                    Some(_) => return Err(err(line, "snr_db: uniform takes (lo, hi)")),
                    None => SnrProfile::List(parse_list(line, key, value, parse_f64)?),
                };
                snr = Some((line, profile));
            }
            "bandwidth" => bandwidth = parse_int(line, key, value)?,
            "scenario_seed" => scenario_seed = parse_int(line, key, value)?,
            "seed" => seed = parse_int(line, key, value)?,
            "n" => {
                let v: Vec<usize> = parse_list(line, key, value, parse_int)?;
                if v.is_empty() || v.contains(&0) {
                    return Err(err(line, "n: need one or more sample sizes, all >= 1"));
                }
                sample_sizes = Some((line, v));
            }
            "y" => {
                let v = parse_list(line, key, value, parse_f64)?;
                if v.is_empty() || v.iter().any(|&y| !(y > 0.0)) {
                    return Err(err(line, "y: need one or more positive aspect ratios"));
                }
                ratios = Some((line, v));
            }
            "trials" => {
                trials = parse_int(line, key, value)?;
                if trials == 0 {
                    return Err(err(line, "trials must be at least 1"));
                }
            }
            "moment_order" => {
                moment_order = parse_int(line, key, value)?;
                if !(1..=MAX_ORDER).contains(&moment_order) {
                    return Err(err(line, format!("moment_order must lie in 1..={MAX_ORDER}")));
                }
            }
            "min_noise_fraction" => {
                min_noise_fraction = parse_f64(line, key, value)?;
                if !(min_noise_fraction > 0.0 && min_noise_fraction < 1.0) {
                    return Err(err(line, "min_noise_fraction must lie in (0, 1)"));
                }
            }
            "histogram_bins" => {
                histogram_bins = parse_int(line, key, value)?;
                if histogram_bins == 0 {
                    return Err(err(line, "histogram_bins must be at least 1"));
                }
            }
            "out" => out_dir = PathBuf::from(value),
            _ => return Err(err(line, format!("unknown key {key:?}"))),
        }
    }

    let p = p.ok_or_else(|| err(0, "missing required key `p`"))?;
    if p < 2 {
        return Err(err(0, "p must be at least 2"));
    }
    let angles = angles.unwrap_or(AngleSpec::List(Vec::new()));
    let count = angles.count();
    if let Some((line, q)) = q {
        if q != count {
            return Err(err(line, format!("q = {q} but {count} angles were given")));
        }
    }
    if count >= p {
        return Err(err(0, format!("need fewer sources than sensors, got q = {count}, p = {p}")));
    }
    let snr_db = match snr {
        Some((line, SnrProfile::List(v))) if v.len() != count => {
            return Err(err(line, format!("snr_db has {} values for {count} sources", v.len())));
        }
        Some((_, s)) => s,
        None if count == 0 => SnrProfile::List(Vec::new()),
        None => return Err(err(0, "missing key `snr_db` for a scenario with sources")),
    };
    let sample_sizes = match (sample_sizes, ratios) {
        (Some(_), Some((line, _))) => return Err(err(line, "give either `n` or `y`, not both")),
        (Some((_, v)), None) => v,
        (None, Some((line, v))) => {
            let n: Vec<usize> = v.iter().map(|y| (p as f64 / y).round() as usize).collect();
            if n.contains(&0) {
                return Err(err(line, "y: aspect ratio too large for this p"));
            }
            n
        }
        (None, None) => return Err(err(0, "missing key `n` (or `y`)")),
    };
    Ok(ExperimentConfig {
        p,
        angles,
        sigma2,
        snr_db,
        bandwidth,
        scenario_seed,
        seed,
        sample_sizes,
        trials,
        moment_order,
        min_noise_fraction,
        histogram_bins,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARRAY50: &str = "\
# fifty sensors, thirty-five sources
p = 50
q = 35
angles = uniform(-70, 70, 35)
sigma2 = 1
snr_db = uniform(0, 10)   # dB
bandwidth = 2
scenario_seed = 7
seed = 42
n = 50, 100, 250, 1500
trials = 10
";

    #[test]
    fn parses_array50_file() {
        let c = parse_config(ARRAY50).unwrap();
        assert_eq!(c.p, 50);
        assert_eq!(c.q(), 35);
        assert_eq!(c.sample_sizes, vec![50, 100, 250, 1500]);
        assert_eq!(c.snr_db, SnrProfile::Uniform { lo: 0.0, hi: 10.0 });
        assert_eq!(c.trials, 10);
        assert_eq!(c.moment_order, DEFAULT_ORDER);
        let spec = c.scenario_spec();
        assert!((spec.angles[0] + 70f64.to_radians()).abs() < 1e-15);
        assert!((spec.angles[34] - 70f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn round_trips() {
        let c = parse_config(ARRAY50).unwrap();
        assert_eq!(parse_config(&c.to_config_string()).unwrap(), c);
        let listed = "p = 4\nangles = -10, 12.5\nsnr_db = 3, 4\ny = 0.5, 0.1\nout = results/x\n";
        let c = parse_config(listed).unwrap();
        assert_eq!(c.sample_sizes, vec![8, 40]);
        assert_eq!(parse_config(&c.to_config_string()).unwrap(), c);
    }

    #[test]
    fn pure_noise_file() {
        let c = parse_config("p = 50\nn = 50\n").unwrap();
        assert_eq!(c.q(), 0);
        assert_eq!(c.snr_db, SnrProfile::List(vec![]));
    }

    fn line_of(text: &str) -> usize {
        match parse_config(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_point_at_the_line() {
        assert_eq!(line_of("p = 5\nn = 10\nbogus = 1\n"), 3);
        assert_eq!(line_of("p = 5\n\n# c\nn = ten\n"), 4);
        assert_eq!(line_of("p = 5\nn = 1\np = 6\n"), 3);
        assert_eq!(line_of("p = 5\nq = 2\nangles = 1\nsnr_db = 0\nn = 3\n"), 2);
        assert_eq!(line_of("p = 5\nangles = 1, 2\nsnr_db = 0\nn = 3\n"), 3);
        assert_eq!(line_of("p = 5\nangles = uniform(1, 2)\n"), 2);
        assert_eq!(line_of("p = 5\nangles = 95\n"), 2);
        assert_eq!(line_of("p = 5\ntrials = 0\n"), 2);
        assert_eq!(line_of("p = 5\nsigma2 = -1\n"), 2);
        assert_eq!(line_of("p = 5\njust words\n"), 2);
        assert_eq!(line_of("n = 5\n"), 0);
        assert_eq!(line_of("p = 5\n"), 0);
        assert_eq!(line_of("p = 3\nangles = 1, 2, 3\nsnr_db = 0,0,0\nn = 3\n"), 0);
    }
}
