use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alphasr::{Dist64, DistSpec, EmpiricalModel, SampleParams};
use alphasr_harness::config::{json_arg, ExperimentConfig};
use alphasr_harness::experiments::run_experiment;
use alphasr_harness::mc::stream_rng;
use alphasr_harness::mechs::run_mechanism;
use alphasr_harness::report::Report;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "alphasr", version, about = "Strongly regular priors, sample-based auctions and their experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a prior at one point.
    Dist {
        #[command(subcommand)]
        action: DistAction,
    },
    /// Draw values from a prior, one per line.
    Sample {
        /// Prior as inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample-based revenue curves.
    Empirical {
        #[command(subcommand)]
        action: EmpiricalAction,
    },
    /// Simulate one mechanism.
    Mech {
        #[command(subcommand)]
        action: MechAction,
    },
    /// Run a named experiment; exits nonzero when any check fails.
    Experiment {
        id: String,
        /// Experiment config as inline JSON or a path to a JSON file.
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DistAction {
    Eval {
        #[arg(long)]
        spec: String,
        /// A value, or a quantile for `cr`, or a threshold for `welfare`.
        #[arg(long)]
        v: f64,
        #[arg(long, value_enum)]
        what: Quantity,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Cdf,
    Pdf,
    Phi,
    Hazard,
    #[value(name = "H")]
    CumulativeHazard,
    Reserve,
    Cr,
    Welfare,
}

#[derive(Subcommand)]
enum EmpiricalAction {
    /// Build a model from samples (whitespace separated) and print its summary as JSON.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        /// Use the first `m` samples; defaults to all of them.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MechAction {
    Run {
        #[arg(long)]
        mech: String,
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(arg: Option<&str>) -> Result<ExperimentConfig> {
    match arg {
        Some(a) => ExperimentConfig::from_json(&json_arg(a)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn load_spec(arg: &str) -> Result<Dist64> {
    let spec: DistSpec = serde_json::from_str(&json_arg(arg)?).context("parsing the prior")?;
    Ok(spec.build()?)
}

fn evaluate(d: &Dist64, v: f64, what: Quantity) -> Result<f64> {
    Ok(match what {
        Quantity::Cdf => d.cdf(v),
        Quantity::Pdf => d.density(v),
        Quantity::Phi => d.virtual_valuation(v)?,
        Quantity::Hazard => d.hazard_rate(v)?.unwrap_or(f64::INFINITY),
        Quantity::CumulativeHazard => d.cumulative_hazard(v),
        Quantity::Reserve => d.reserve_price()?,
        Quantity::Cr => {
            if !(0.0..=1.0).contains(&v) {
                bail!("--v is a quantile in [0, 1] for cr");
            }
            d.revenue_curve(v).cr
        }
        Quantity::Welfare => d.posted_price_welfare(v),
    })
}

fn write_report(report: &Report, out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    eprintln!("{}: {} rows in {:.2?}", report.experiment_id, report.rows.len(), report.runtime);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Dist {
            action: DistAction::Eval { spec, v, what },
        } => {
            println!("{}", evaluate(&load_spec(&spec)?, v, what)?);
        }
        Command::Sample { spec, m, seed, out } => {
            let d = load_spec(&spec)?;
            let mut w = output(out.as_deref())?;
            for x in d.sample(&mut stream_rng(seed, 0), m) {
                writeln!(w, "{x}")?;
            }
            w.flush()?;
        }
        Command::Empirical {
            action: EmpiricalAction::Build { input, m, gamma, xi, delta, report },
        } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut samples = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().with_context(|| format!("bad sample '{t}'")))
                .collect::<Result<Vec<_>>>()?;
            if let Some(m) = m {
                if samples.len() < m {
                    bail!("asked for {m} samples but the file has {}", samples.len());
                }
                samples.truncate(m);
            }
            let params = SampleParams::new(samples.len(), gamma, xi, delta)?;
            let model = EmpiricalModel::build(&samples, &params)?;
            let mut w = output(report.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &model.report(&params))?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Mech {
            action: MechAction::Run { mech, config, trials, seed, out },
        } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.trials = trials.or(cfg.trials);
            cfg.master_seed = seed.unwrap_or(cfg.master_seed);
            write_report(&run_mechanism(&mech, &cfg)?, out.as_deref())?;
        }
        Command::Experiment { id, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let out = out.or_else(|| cfg.out.clone());
            let report = run_experiment(&id, &cfg)?;
            write_report(&report, out.as_deref())?;
            for row in report.failures() {
                eprintln!("FAIL {}: value {} target {}", row.metric, row.value, row.target);
            }
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
