//! Experiment runner for the riccati laboratory.
//!
//! Usage: `riccati <experiment> [--flag value]...`
//!
//! Experiments: lyapunov, sections, srb, schottky-sections,
//! cusp-integrability, canonical-check, certify.
//!
//! Common flags: --surface <preset|path>, --representation <preset|path>,
//! --schottky <preset|path>, --T, --step, --dt, --orbits, --samples,
//! --crossings, --kind, --lambda, --theta, --n, --seed, --out, --config.
//! The default output directory is `out` (override with --out or the
//! RICCATI_OUT environment variable).
//!
//! Exit codes: 0 success, 2 usage error or unknown experiment, 3 preset or
//! file not found, 4 malformed configuration, 5 runtime failure.

mod config;
mod experiments;
mod report;

use config::{Config, ConfigError};
use experiments::RunError;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.first().map(String::as_str) == Some("--help") || args.is_empty() {
        print_help();
        std::process::exit(if args.is_empty() { 2 } else { 0 });
    }
    let config = match Config::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(exit_code_for(&e));
        }
    };
    match experiments::run(&config) {
        Ok(()) => {}
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            std::process::exit(exit_code_for(&e));
        }
        Err(RunError::Io(e)) => {
            eprintln!("io error: {e}");
            std::process::exit(5);
        }
        Err(RunError::Runtime(e)) => {
            eprintln!("runtime error: {e}");
            std::process::exit(5);
        }
    }
}

fn exit_code_for(e: &ConfigError) -> i32 {
    match e {
        ConfigError::Usage(_) => 2,
        ConfigError::NotFound(_) => 3,
        ConfigError::Malformed(_) => 4,
    }
}

fn print_help() {
    println!(
        "riccati {}: foliated geodesic flow laboratory

usage: riccati <experiment> [--flag value]...

experiments:
  lyapunov            Lyapunov spectrum of a representation over a surface
  sections            section estimates (vs exact sections for canonical)
  srb                 basin test and forward/backward occupation histograms
  schottky-sections   nested-disc sections over geodesic itineraries
  cusp-integrability  integrability integral ladder and dichotomy verdict
  canonical-check     exact contraction law of the canonical suspension
  certify             ping-pong certificate of a Schottky system

common flags:
  --surface <preset|path>         thrice-punctured-sphere | once-punctured-torus
  --representation <preset|path>  canonical | schottky | unitary | trivial
  --schottky <preset|path>        schottky-pair
  --T --step --orbits --samples --crossings --kind --lambda --theta --n
  --seed <u64>                    --out <dir>        --config <file>",
        env!("CARGO_PKG_VERSION")
    );
}
