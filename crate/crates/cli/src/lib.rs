//! Command-line driver: parses arguments, runs one verification suite and
//! writes its JSON report.
//!
//! Exit codes: 0 when every check passes, 1 when some check fails, 2 on
//! malformed input, numerical breakdown or sample exhaustion.

pub mod config;
pub mod report;
pub mod suites;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{parse_complex, parse_trunc, Config, Overrides};
use report::Report;
use toric_ell::{Complex64 as C64, Truncation};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] toric_ell::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "toric-ell",
    version,
    about = "Verification suites for toric and orbifold elliptic genera"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Modular parameter as "re,im".
    #[arg(long, global = true, value_parser = parse_complex)]
    pub tau: Option<C64>,
    /// Elliptic variable as "re,im".
    #[arg(long, global = true, value_parser = parse_complex)]
    pub z: Option<C64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// "auto" or a fixed number of product factors.
    #[arg(long, global = true, value_parser = parse_trunc)]
    pub trunc: Option<Truncation>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file with any of tau, z, tol, trunc, samples, seed.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record per-check wall-clock times (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Theta product against its series, and SL(2,Z) transformation residuals.
    ThetaCheck,
    /// Vanishing of the genus of a Calabi-Yau pair.
    Rigidity { pair: PathBuf },
    /// Invariance of the genus under a star subdivision with pulled-back coefficients.
    Blowup { fine: PathBuf, coarse: PathBuf },
    /// Pushforward along the blow-up of each maximal cone.
    Pushforward { fan: PathBuf },
    /// Orbifold genus of C^2/Z_n against its crepant resolution.
    Mckay {
        #[arg(long)]
        n: usize,
    },
    /// Orbifold genus of C^2/Z_n against its blow-up at the origin.
    OrbBlowup {
        #[arg(long)]
        n: usize,
    },
    /// Stringy Euler number and its limits.
    Stringy { fan: PathBuf, divisor: PathBuf },
    /// chi_y genus of a complete fan.
    ChiY { fan: PathBuf },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            tau: self.tau,
            z: self.z,
            tol: self.tol,
            trunc: self.trunc,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let overrides = cli.overrides();
    // scenario files sit between the config file and the flags
    let scenario_cfg = cfg.clone();
    overrides.apply(&mut cfg);
    if cfg.samples == 0 {
        return Err(CliError::Input("samples must be positive".into()));
    }
    let t = cli.timings;
    match &cli.command {
        Command::ThetaCheck => suites::theta_check(&cfg, t),
        Command::Rigidity { pair } => suites::rigidity(pair, &scenario_cfg, &overrides, t),
        Command::Blowup { fine, coarse } => {
            suites::blowup(fine, coarse, &scenario_cfg, &overrides, t)
        }
        Command::Pushforward { fan } => suites::pushforward_suite(fan, &cfg, t),
        Command::Mckay { n } => suites::mckay(positive(*n)?, &cfg, t),
        Command::OrbBlowup { n } => suites::orb_blowup(positive(*n)?, &cfg, t),
        Command::Stringy { fan, divisor } => suites::stringy(fan, divisor, &cfg, t),
        Command::ChiY { fan } => suites::chi_y(fan, &cfg, t),
    }
}

fn positive(n: usize) -> Result<usize, CliError> {
    if n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    Ok(n)
}

/// Runs the command, writes the report and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(report) => {
            let text = report.to_json();
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: {}: {e}", path.display());
                        return 2;
                    }
                }
                None => println!("{text}"),
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
