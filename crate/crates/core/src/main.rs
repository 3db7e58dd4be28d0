use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectral_detect::config::{load_config, ExperimentConfig};
use spectral_detect::experiment::{emit_density_curve, endpoint_rows, endpoint_table, run_experiment, write_endpoint_tables, write_report};
use spectral_detect::arraysim::build_scenario;
use spectral_detect::support::{critical_y, find_support_layout, NoiseSignalModel};
use spectral_detect::Error;

#[derive(Parser)]
#[command(name = "spectral-detect", version, about = "Sample covariance spectra and source enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the file).
    #[arg(long, env = "RMT_SEED")]
    seed: Option<u64>,
    /// Output directory (overrides the file).
    #[arg(long, env = "RMT_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment and write all tables.
    Run {
        #[command(flatten)]
        common: Common,
        /// Trials per sample size (overrides the file).
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Theoretical support endpoints for the configured sample sizes.
    Endpoints {
        #[command(flatten)]
        common: Common,
    },
    /// Limiting density curves.
    Density {
        #[command(flatten)]
        common: Common,
        /// Aspect ratio; defaults to every configured sample size.
        #[arg(long)]
        y: Option<f64>,
        /// Single-spike model `B:Y1` (signal eigenvalue and its weight) instead of a scenario.
        #[arg(long, value_parser = parse_spike)]
        spike: Option<(f64, f64)>,
        /// Noise power of the single-spike model.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Grid points per support component.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Critical aspect ratio of the configured scenario.
    CriticalY {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_spike(s: &str) -> Result<(f64, f64), String> {
    let (b, w) = s.split_once(':').ok_or("expected B:Y1")?;
    let b = b.trim().parse().map_err(|_| format!("bad signal eigenvalue {b:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad weight {w:?}"))?;
    Ok((b, w))
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config {
        line: 0,
        message: "--config is required".into(),
    })?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

/// Scenario construction problems are input errors.
fn as_config_error(e: Error) -> Error {
    match e {
        Error::Domain(message) => Error::Config { line: 0, message },
        other => other,
    }
}

fn scenario_model(cfg: &ExperimentConfig) -> Result<NoiseSignalModel, Error> {
    let scenario = build_scenario(&cfg.scenario_spec()).map_err(as_config_error)?;
    scenario.model()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { common, trials, jobs } => {
            let mut cfg = load(&common)?;
            if let Some(t) = trials {
                if t == 0 {
                    return Err(Error::Config { line: 0, message: "--trials must be at least 1".into() });
                }
                cfg.trials = t;
            }
            build_scenario(&cfg.scenario_spec()).map_err(as_config_error)?;
            let report = run_experiment(&cfg, jobs)?;
            let files = write_report(&report, &cfg.out_dir)?;
            print!("{}", std::fs::read_to_string(cfg.out_dir.join("summary.txt"))?);
            println!("wrote {} files to {}", files.len(), cfg.out_dir.display());
            let failures = report.failures();
            if failures > 0 {
                eprintln!("{failures} trial(s) failed; see failures.txt");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Endpoints { common } => {
            let cfg = load(&common)?;
            let model = scenario_model(&cfg)?;
            let ys: Vec<f64> = cfg.sample_sizes.iter().map(|&n| cfg.p as f64 / n as f64).collect();
            let rows = endpoint_rows(&model, &ys)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            write_endpoint_tables(&cfg.out_dir, &rows)?;
            print!("{}", endpoint_table(&rows));
        }
        Command::Density { common, y, spike, sigma2, points } => {
            let (model, out, sizes, p) = match (spike, &common.config) {
                (Some((b, w)), _) => {
                    let model = NoiseSignalModel::single_spike(sigma2, w, b).map_err(as_config_error)?;
                    (model, common.out.clone().unwrap_or_else(|| PathBuf::from("out")), Vec::new(), 0)
                }
                (None, _) => {
                    let cfg = load(&common)?;
                    (scenario_model(&cfg)?, cfg.out_dir.clone(), cfg.sample_sizes.clone(), cfg.p)
                }
            };
            if points < 2 {
                return Err(Error::Config { line: 0, message: "--points must be at least 2".into() });
            }
            let targets: Vec<(String, f64)> = match y {
                Some(y) if y > 0.0 => vec![(format!("y{y}"), y)],
                Some(y) => return Err(Error::Config { line: 0, message: format!("--y must be positive, got {y}") }),
                None if sizes.is_empty() => {
                    return Err(Error::Config { line: 0, message: "--y is required with --spike".into() })
                }
                None => sizes.iter().map(|&n| (format!("n{n}"), p as f64 / n as f64)).collect(),
            };
            for (label, y) in targets {
                for f in emit_density_curve(&out, &label, y, &model, points)? {
                    println!("wrote {}", f.display());
                }
            }
        }
        Command::CriticalY { common } => {
            let cfg = load(&common)?;
            let model = scenario_model(&cfg)?;
            let yc = critical_y(&model)?;
            println!("p = {}, q = {}, sigma2 = {}", cfg.p, cfg.q(), cfg.sigma2);
            if let (Some(lo), Some(hi)) = (model.b_min(), model.b_max()) {
                println!("signal eigenvalues in [{lo}, {hi}], weight {}", model.y1());
            }
            println!("critical aspect ratio = {yc}");
            if yc.is_finite() {
                println!("split requires n > {}", cfg.p as f64 / yc);
            }
            for &n in &cfg.sample_sizes {
                let y = cfg.p as f64 / n as f64;
                let split = find_support_layout(y, &model)?.noise_gap().is_some();
                println!("n = {n}: y = {y}, {}", if split { "split" } else { "no split" });
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
