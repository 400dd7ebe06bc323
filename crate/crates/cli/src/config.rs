//! Run parameters: built-in defaults, overridden by a config file, then by
//! scenario-file fields, then by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use toric_ell::scenario::{complex, complex_pair, Scenario};
use toric_ell::{Complex64 as C64, EvalContext, Truncation};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tau: C64,
    pub z: C64,
    pub tol: f64,
    pub trunc: Truncation,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tau: C64::new(0.0, 1.0),
            z: C64::new(0.21, 0.03),
            tol: 1e-7,
            trunc: Truncation::Auto,
            samples: 10,
            seed: 42,
        }
    }
}

/// Config file contents; every field optional.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tau: Option<[f64; 2]>,
    pub z: Option<[f64; 2]>,
    pub tol: Option<f64>,
    pub trunc: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// Values given as flags; they take precedence over every file.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Overrides {
    pub tau: Option<C64>,
    pub z: Option<C64>,
    pub tol: Option<f64>,
    pub trunc: Option<Truncation>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(t) = self.tau {
            cfg.tau = t;
        }
        if let Some(z) = self.z {
            cfg.z = z;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(t) = self.trunc {
            cfg.trunc = t;
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

pub fn parse_trunc(s: &str) -> Result<Truncation, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Truncation::Auto);
    }
    match s.parse::<usize>() {
        Ok(l) if l > 0 => Ok(Truncation::Fixed(l)),
        _ => Err(format!(
            "truncation must be \"auto\" or a positive integer, got {s:?}"
        )),
    }
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let bad = || format!("expected \"re,im\", got {s:?}");
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

impl Config {
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        if let Some(t) = file.tau {
            self.tau = complex(t);
        }
        if let Some(z) = file.z {
            self.z = complex(z);
        }
        if let Some(tol) = file.tol {
            self.tol = tol;
        }
        if let Some(t) = &file.trunc {
            self.trunc = parse_trunc(t).map_err(CliError::Input)?;
        }
        if let Some(n) = file.samples {
            self.samples = n;
        }
        if let Some(s) = file.seed {
            self.seed = s;
        }
        Ok(())
    }

    pub fn apply_scenario(&mut self, s: &Scenario) {
        if let Some(t) = s.tau {
            self.tau = complex(t);
        }
        if let Some(z) = s.z {
            self.z = complex(z);
        }
        if let Some(n) = s.samples {
            self.samples = n;
        }
        if let Some(seed) = s.seed {
            self.seed = seed;
        }
    }

    pub fn context(&self) -> Result<EvalContext, CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(EvalContext::new(self.tau, self.z)?
            .with_trunc(self.trunc)
            .with_tol(self.tol))
    }

    pub fn echo(&self) -> Value {
        json!({
            "tau": complex_pair(self.tau),
            "z": complex_pair(self.z),
            "tol": self.tol,
            "trunc": match self.trunc {
                Truncation::Auto => json!("auto"),
                Truncation::Fixed(l) => json!(l),
            },
            "samples": self.samples,
            "seed": self.seed,
        })
    }
}
