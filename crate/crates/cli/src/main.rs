use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use omnitrack::measures::ReportParams;
use omnitrack::synthetic::SyntheticSpec;
use omnitrack_cli::sample::SampleKind;
use omnitrack_cli::{
    cmd_cubemap, cmd_evaluate, cmd_generate, cmd_report, cmd_sample_tracker, cmd_selftest,
    cmd_stats, BenchConfig, Overrides,
};

/// Omnidirectional viewpoint-sequence generator and tracker evaluation.
#[derive(Parser)]
#[command(name = "omnitrack", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render viewpoint sequences to PNG frames, ground truth and manifest.
    Generate(Overrides),
    /// Run a tracker over every pattern and sequence under the reset protocol.
    Evaluate(Overrides),
    /// Compute accuracy, robustness and EAO tables from run directories.
    Report {
        /// Root of the run directories (e.g. out/runs).
        runs: PathBuf,
        #[arg(long, short, default_value = "report")]
        output: PathBuf,
        #[arg(long, default_value_t = 10)]
        burn_in: usize,
        /// Sensitivity of the A-R robustness transform.
        #[arg(long, default_value_t = 100.0)]
        sensitivity: f64,
        /// EAO length range LO:HI (default: 1 to the sequence length).
        #[arg(long, value_parser = parse_range)]
        eao_range: Option<(usize, usize)>,
    },
    /// Attribute statistics (MAC, FPA, INTER) of an annotation file.
    Stats {
        /// JSON file {vocabulary, sequences: [{id, frames}]}.
        input: PathBuf,
        /// Also write stats.csv, fpa.csv and stats.json here.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evaluate the built-in and sample trackers end to end.
    Selftest {
        /// Working directory (default: a fresh temporary directory).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        frames: usize,
        #[arg(long, default_value_t = 64)]
        face_size: usize,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Write the stock synthetic sources to disk as a dataset.
    Synth {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        #[arg(long, default_value_t = 128)]
        face_size: usize,
    },
    /// Convert a directory of equirectangular PNG frames to cube-map strips.
    Cubemap {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 512)]
        face_size: usize,
        /// Index of the first output frame.
        #[arg(long, default_value_t = 0)]
        first_index: usize,
    },
    /// Protocol sample tracker: static, slow:MS, stall:N, crash:N, garbage, mute.
    #[command(hide = true)]
    SampleTracker {
        kind: SampleKind,
        /// Connect to the evaluator over TCP instead of using stdio.
        #[arg(long)]
        connect: Option<String>,
        #[arg(long, default_value = "sample")]
        name: String,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (lo, hi) = s.split_once(':').context("expected LO:HI")?;
    let (lo, hi) = (lo.parse()?, hi.parse()?);
    if lo < 1 || hi < lo {
        bail!("range must satisfy 1 <= LO <= HI");
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Generate(o) => {
            let r = BenchConfig::from_overrides(&o)?.resolve(&o.sequences)?;
            for d in cmd_generate(&r)? {
                println!("{}", d.display());
            }
            Ok(0)
        }
        Cmd::Evaluate(o) => {
            let r = BenchConfig::from_overrides(&o)?.resolve(&o.sequences)?;
            let s = cmd_evaluate(&r)?;
            println!(
                "{} runs ({} resumed), {} infrastructure failures",
                s.runs.len(),
                s.resumed,
                s.infrastructure_failures
            );
            Ok(if s.infrastructure_failures > 0 { 1 } else { 0 })
        }
        Cmd::Report {
            runs,
            output,
            burn_in,
            sensitivity,
            eao_range,
        } => {
            let params = ReportParams {
                burn_in,
                sensitivity,
                eao_range,
            };
            let r = cmd_report(&runs, &output, params)?;
            println!("tracker,pattern,accuracy,failures,eao");
            let opt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
            for e in &r.entries {
                println!(
                    "{},{},{},{},{}",
                    e.tracker,
                    e.pattern,
                    opt(e.accuracy),
                    e.failures,
                    opt(e.eao)
                );
            }
            Ok(0)
        }
        Cmd::Stats { input, output } => {
            let s = cmd_stats(&input, output.as_deref())?;
            print!("{}", omnitrack_cli::stats::summary_csv(&s));
            Ok(0)
        }
        Cmd::Selftest {
            output,
            frames,
            face_size,
            workers,
        } => {
            let tmp;
            let dir = match output {
                Some(d) => d,
                None => {
                    tmp = std::env::temp_dir()
                        .join(format!("omnitrack-selftest-{}", std::process::id()));
                    tmp
                }
            };
            let exe = std::env::current_exe().ok();
            let checks = cmd_selftest(&dir, exe.as_deref(), frames, face_size, workers)?;
            let mut ok = true;
            for c in &checks {
                ok &= c.passed;
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} {}", c.name, c.detail);
            }
            println!("outputs in {}", dir.display());
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Synth {
            output,
            frames,
            face_size,
        } => {
            for spec in SyntheticSpec::stock(frames, face_size) {
                println!("{}", spec.write_dataset(&output)?.display());
            }
            Ok(0)
        }
        Cmd::Cubemap {
            input,
            output,
            face_size,
            first_index,
        } => {
            let n = cmd_cubemap(&input, &output, face_size, first_index)?;
            println!("{n} frames written to {}", output.display());
            Ok(0)
        }
        Cmd::SampleTracker {
            kind,
            connect,
            name,
        } => {
            cmd_sample_tracker(kind, connect.as_deref(), &name)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
