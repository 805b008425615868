//! `emcal`: batch front end for the photon-number calibration pipelines.
//!
//! Exit codes: 0 success, 1 other failure (e.g. writing outputs), 2 bad
//! configuration or input, 3 fit failure, 4 consistency check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};

use emcal::pipeline::{
    calibrate, cross_consistency, reference_config, read_trace_dir, selftest, synthesize,
    write_plots, write_trace_dir, CalibrationReport, Experiment, ExperimentConfig,
    PipelineError, PipelineKind, DEFAULT_CONSISTENCY_THRESHOLD,
};

#[derive(Debug, Parser)]
#[command(name = "emcal", version, about = "Dual photon-number calibration: ac-Stark, EMIA and thermal g_m0")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the traces of a configured sweep into a directory of CSV files.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the noise seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one calibration pipeline and write its JSON report.
    Calibrate {
        pipeline: PipelineArg,
        #[arg(long)]
        config: PathBuf,
        /// Analyze these traces instead of synthesizing them.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        /// Overrides the noise seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write SVG/CSV figures into this directory.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Compare the calibration factors of two reports.
    Check {
        #[arg(long)]
        report_a: PathBuf,
        #[arg(long)]
        report_b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CONSISTENCY_THRESHOLD)]
        threshold: f64,
    },
    /// Run all pipelines noiselessly on the built-in reference device.
    Selftest,
    /// Print the reference configuration of a pipeline as TOML.
    Template { pipeline: PipelineArg },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PipelineArg {
    Qubit,
    Emia,
    Gm0,
}

impl From<PipelineArg> for PipelineKind {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::Qubit => PipelineKind::QubitStark,
            PipelineArg::Emia => PipelineKind::Emia,
            PipelineArg::Gm0 => PipelineKind::Gm0Thermal,
        }
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome = Result<(), Failure>;

trait Classify<T> {
    /// Input-stage failure: exit 2.
    fn input(self) -> Result<T, Failure>;
    /// Output-stage failure: exit 1.
    fn output(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, error: e.into() })
    }

    fn output(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 1, error: e.into() })
    }
}

/// Pipeline errors: estimator failures exit 3, everything else is bad input.
fn pipeline<T>(r: Result<T, PipelineError>) -> Result<T, Failure> {
    r.map_err(|e| Failure {
        code: if e.is_fit_failure() { 3 } else { 2 },
        error: e.into(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let result = match cli.command {
        Command::Synth { config, out, seed } => cmd_synth(&config, &out, seed),
        Command::Calibrate {
            pipeline,
            config,
            traces,
            report,
            seed,
            plots,
        } => cmd_calibrate(pipeline.into(), &config, traces.as_deref(), &report, seed, plots.as_deref()),
        Command::Check {
            report_a,
            report_b,
            threshold,
        } => cmd_check(&report_a, &report_b, threshold),
        Command::Selftest => cmd_selftest(),
        Command::Template { pipeline } => cmd_template(pipeline.into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn load_experiment(path: &Path, seed: Option<u64>) -> Result<Experiment, Failure> {
    let mut cfg = ExperimentConfig::load(path)
        .with_context(|| format!("loading configuration {}", path.display()))
        .input()?;
    if let Some(seed) = seed {
        cfg.noise.seed = seed;
    }
    cfg.resolve()
        .with_context(|| format!("validating configuration {}", path.display()))
        .input()
}

fn cmd_synth(config: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    let exp = load_experiment(config, seed)?;
    let traces = pipeline(synthesize(&exp))?;
    let files = write_trace_dir(out, &traces)
        .with_context(|| format!("writing traces to {}", out.display()))
        .output()?;
    println!("wrote {} {} traces to {}", files.len(), exp.pipeline, out.display());
    Ok(())
}

fn cmd_calibrate(
    kind: PipelineKind,
    config: &Path,
    traces: Option<&Path>,
    report_path: &Path,
    seed: Option<u64>,
    plots: Option<&Path>,
) -> Outcome {
    let exp = load_experiment(config, seed)?;
    if exp.pipeline != kind {
        return Err(anyhow!(
            "configuration {} is for pipeline {}, not {kind}",
            config.display(),
            exp.pipeline
        ))
        .input();
    }
    let traces = match traces {
        Some(dir) => {
            info!("reading traces from {}", dir.display());
            read_trace_dir(dir)
                .with_context(|| format!("reading traces from {}", dir.display()))
                .input()?
        }
        None => pipeline(synthesize(&exp))?,
    };
    let report = pipeline(calibrate(&exp, &traces))?;
    report
        .save(report_path)
        .with_context(|| format!("writing report {}", report_path.display()))
        .output()?;
    if let Some(dir) = plots {
        write_plots(&report, dir)
            .with_context(|| format!("writing figures to {}", dir.display()))
            .output()?;
    }
    print_summary(&report);
    Ok(())
}

fn print_summary(r: &CalibrationReport) {
    println!("pipeline {}  ({} points, {} excluded)", r.pipeline, r.points.len(), r.excluded.len());
    if let Some(x) = &r.x {
        println!(
            "  x = {:.4} ± {:.4} 1/s  (statistical ± {:.2e})",
            x.value_per_s, x.sigma_per_s, x.sigma_stat_per_s
        );
    }
    if let Some(g) = r.gamma_m {
        println!("  gamma_m/2pi = {:.4} ± {:.2e} Hz", g.hz, g.sigma_hz);
    }
    if let Some(g) = r.g_m0 {
        println!("  g_m0/2pi = {:.5} ± {:.2e} Hz", g.hz, g.sigma_hz);
    }
    if let Some(s) = r.thermal_slope_hz2_per_k {
        println!("  slope = {:.2} ± {:.2e} Hz^2/K", s.value, s.sigma);
    }
    if let Some(range) = r.photon_range {
        println!("  photons {:.4e} .. {:.4e}", range.min, range.max);
    }
}

fn cmd_check(a: &Path, b: &Path, threshold: f64) -> Outcome {
    let ra = CalibrationReport::load(a).input()?;
    let rb = CalibrationReport::load(b).input()?;
    let verdict = pipeline(cross_consistency(&ra, &rb, threshold))?;
    let json = serde_json::to_string_pretty(&verdict).output()?;
    println!("{json}");
    if verdict.pass {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            error: anyhow!(
                "relative difference {:.4} exceeds threshold {threshold}",
                verdict.relative_difference
            ),
        })
    }
}

fn cmd_selftest() -> Outcome {
    let out = pipeline(selftest())?;
    for c in &out.checks {
        println!(
            "{} {:<14} {:.10} (expected {}, tolerance {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected,
            c.relative_tolerance
        );
    }
    let v = &out.consistency;
    println!(
        "{} consistency    relative difference {:.4} at threshold {}, photon span {:.3e}",
        if v.pass { "PASS" } else { "FAIL" },
        v.relative_difference,
        v.threshold,
        v.photon_span.unwrap_or(f64::NAN)
    );
    if out.checks.iter().any(|c| !c.pass) {
        return Err(Failure {
            code: 3,
            error: anyhow!("selftest recovered values outside tolerance"),
        });
    }
    if !v.pass {
        return Err(Failure {
            code: 4,
            error: anyhow!("selftest consistency check failed"),
        });
    }
    Ok(())
}

fn cmd_template(kind: PipelineKind) -> Outcome {
    let text = reference_config(kind).to_toml_string().output()?;
    print!("{text}");
    Ok(())
}
