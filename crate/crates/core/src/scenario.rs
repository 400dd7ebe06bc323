//! JSON file formats: fans, toric pairs (scenarios) and divisors.
//!
//! Complex numbers are `[re, im]`; rationals are `"p/q"` strings. A scenario's
//! `fan` is either an inline fan object or a path, relative paths being taken
//! from the scenario file's directory.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::genus::{Divisor, ToricPair};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FanSource {
    Inline(Fan),
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub fan: FanSource,
    #[serde(default, with = "rational::serde_vec")]
    pub delta: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorFile {
    pub rays: Vec<usize>,
    #[serde(with = "rational::serde_vec")]
    pub coefficients: Vec<Rational>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(s: &str, what: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("{what} JSON: {e}")))
}

pub fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

pub fn complex_pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn load_fan(path: &Path) -> Result<Fan> {
    Fan::from_json(&read(path)?)
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        parse_json(s, "scenario")
    }

    /// Reads a scenario and inlines its fan.
    pub fn load(path: &Path) -> Result<Self> {
        let mut scenario = Self::from_json(&read(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        scenario.fan = FanSource::Inline(scenario.resolve_fan(&base)?);
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// The validated fan, reading it from disk when given as a path.
    pub fn resolve_fan(&self, base: &Path) -> Result<Fan> {
        match &self.fan {
            FanSource::Inline(f) => Fan::new(f.dim, f.rays.clone(), f.max_cones.clone()),
            FanSource::Path(p) => {
                let p = PathBuf::from(p);
                load_fan(&if p.is_absolute() { p } else { base.join(p) })
            }
        }
    }

    /// The pair; an empty `delta` means all coefficients zero.
    pub fn pair(&self, base: &Path) -> Result<ToricPair> {
        let fan = self.resolve_fan(base)?;
        if self.delta.is_empty() {
            return Ok(ToricPair::trivial(fan));
        }
        if self.delta.len() != fan.num_rays() {
            return Err(Error::InvalidInput(format!(
                "delta has {} entries, fan has {} rays",
                self.delta.len(),
                fan.num_rays()
            )));
        }
        ToricPair::new(fan, self.delta.clone())
    }
}

impl DivisorFile {
    pub fn from_json(s: &str) -> Result<Self> {
        parse_json(s, "divisor")
    }

    pub fn load(path: &Path) -> Result<Divisor> {
        Self::from_json(&read(path)?)?.into_divisor()
    }

    pub fn into_divisor(self) -> Result<Divisor> {
        Divisor::new(self.rays, self.coefficients)
    }
}
