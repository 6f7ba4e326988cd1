use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gerbecheck::bundle::load_bundle;
use gerbecheck::suites::{run_suite, SUITES};
use gerbecheck::symexpr::Oracle;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

/// Checks the gerbe, Lie 2-algebra and butterfly identities on a geometry bundle.
#[derive(Debug, Parser)]
#[command(name = "gerbecheck", version)]
struct Args {
    /// Geometry-bundle JSON file.
    bundle: PathBuf,
    /// Suite to run.
    #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: String,
    /// Sample points per comparison.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    /// Relative tolerance of the sampled comparisons.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed of the sample points, decimal or 0x-prefixed hex.
    #[arg(long, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("invalid seed `{}`: {}", s, e))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.samples == 0 || args.tol.is_nan() || args.tol <= 0.0 {
        eprintln!("error: --samples must be positive and --tol must be a positive number");
        return ExitCode::from(2);
    }
    let bundle = match load_bundle(&args.bundle) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    let oracle = Oracle { samples: args.samples, tol: args.tol, seed: args.seed };
    let report = match run_suite(&bundle, &args.suite, &oracle) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Structured => print!("{}", report.to_json_lines()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
