//! Run configuration: grid, named tolerances, output format and seed.
//!
//! Read from `key=value` lines; `#` starts a comment. Grid keys are `t_min`,
//! `t_max`, `n`; `seed` and `format` are scalars; any other key must name a
//! tolerance, optionally prefixed with `tol.`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MIN_NODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown output format '{other}'"))),
        }
    }
}

/// Default tolerances, one per named check.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("norm_svd", 0.02),
    ("norm_svd_cross", 0.03),
    ("norm_formula", 1e-10),
    ("norm_agreement", 1e-8),
    ("green_residual", 1e-3),
    ("green_order", 2.0),
    ("coefficient", 1e-4),
    ("inequality", 1e-6),
    ("closed_form", 1e-8),
    ("tau_norm", 1e-6),
    ("profile", 1e-8),
    ("correlation", 0.99),
    ("form", 1e-6),
    ("positivity", 1e-10),
    ("polynomial", 1e-12),
    ("cauchy_riemann", 1e-7),
    ("graph_ratio", 1e-8),
    ("cauchy", 1e-6),
    ("conjugation", 1e-14),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_min: -12.0,
            t_max: 12.0,
            n: 1024,
            tolerances: DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            format: OutputFormat::Json,
            seed: 42,
        }
    }
}

impl RunConfig {
    /// Tolerance by name; unknown names are a programming error.
    pub fn tol(&self, name: &str) -> f64 {
        *self
            .tolerances
            .get(name)
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("{key}: '{v}' is not a number")));
        match key {
            "t_min" => self.t_min = num(value)?,
            "t_max" => self.t_max = num(value)?,
            "n" => self.n = value.parse().map_err(|_| Error::Parse(format!("n: '{value}' is not an integer")))?,
            "seed" => {
                self.seed = value.parse().map_err(|_| Error::Parse(format!("seed: '{value}' is not an integer")))?
            }
            "format" => self.format = value.parse()?,
            other => {
                let name = other.strip_prefix("tol.").unwrap_or(other);
                match self.tolerances.get_mut(name) {
                    Some(slot) => *slot = num(value)?,
                    None => return Err(Error::Parse(format!("unknown configuration key '{other}'"))),
                }
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge(text)?;
        Ok(cfg)
    }

    /// Applies `key=value` lines on top of the current values.
    pub fn merge(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("n = {} < {MIN_NODES}", self.n)));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return Err(Error::InvalidGrid(format!("bad range [{}, {}]", self.t_min, self.t_max)));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("tolerance {k} = {v} must be positive")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = RunConfig::parse("# grid\nt_min = -10\nn=512\nseed=7\ntol.form = 1e-5\ncorrelation=0.95\nformat=csv\n").unwrap();
        assert_eq!((cfg.t_min, cfg.n, cfg.seed), (-10.0, 512, 7));
        assert_eq!(cfg.tol("form"), 1e-5);
        assert_eq!(cfg.tol("correlation"), 0.95);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.tol("norm_svd"), 0.02);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("bogus=1").is_err());
        assert!(RunConfig::parse("n").is_err());
        assert!(RunConfig::parse("n=8").unwrap().validate().is_err());
        assert!(RunConfig::parse("tol.form=0").unwrap().validate().is_err());
        assert!(RunConfig::parse("t_min=3\nt_max=1").unwrap().validate().is_err());
    }
}
