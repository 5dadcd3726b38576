use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use semiconcave::cli::{resolve, run_scenario, ConfigFile, GridFormat, Overrides, Stage, StageStatus};
use semiconcave::Error;

/// Runs a semiconcavity scenario and writes CSV/JSON artifacts.
///
/// Exit codes: 0 every assertion passed, 1 an assertion failed, 2 usage or
/// configuration error, 3 runtime error.
#[derive(Parser, Debug)]
#[command(name = "semiconcave", version, allow_negative_numbers = true)]
struct Args {
    /// Built-in scenario: example1, example2, example3, affine-sanity, custom.
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario JSON (schema 1); overrides the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated stages: certify, support, extend, gradients,
    /// condition, arc, mollify; prerequisites are added.
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Semiconcavity constant of u.
    #[arg(long = "C")]
    c: Option<f64>,
    /// Support grid spacing.
    #[arg(long)]
    spacing: Option<f64>,
    /// Ball radius.
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated mollifier scales.
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Random triples per certificate.
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid artifact format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Kernel coefficient; defaults to C + 1.
    #[arg(long)]
    coefficient: Option<f64>,
}

fn overrides(args: &Args) -> semiconcave::Result<Overrides> {
    Ok(Overrides {
        scenario: args.scenario.clone(),
        stages: args.stages.as_ref().map(|v| v.iter().map(|s| Stage::parse(s.trim())).collect()).transpose()?,
        alpha: args.alpha,
        c: args.c,
        spacing: args.spacing,
        delta: args.delta,
        h_list: args.h_list.clone(),
        triples: args.triples,
        seed: args.seed,
        format: args.format.as_deref().map(GridFormat::parse).transpose()?,
        coefficient: args.coefficient,
        out: args.out.clone(),
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = (|| {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                Some(ConfigFile::parse(&text)?)
            }
            None => None,
        };
        resolve(file.as_ref(), &overrides(&args)?)
    })();
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&config) {
        Ok(report) => {
            for stage in &report.stages {
                let status = match stage.status {
                    StageStatus::Passed => "pass",
                    StageStatus::Failed => "FAIL",
                    StageStatus::Skipped => "skip",
                };
                println!("{status:>4}  {:<10} {:>10.1} ms", stage.stage.name(), stage.wall_ms);
                for a in stage.assertions.iter().filter(|a| !a.passed) {
                    println!("      {}: {}", a.name, a.detail);
                }
            }
            println!("report: {}", PathBuf::from(&config.out).join("report.json").display());
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
