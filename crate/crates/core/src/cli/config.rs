//! TOML experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::processes::{ProcessParams, DEFAULT_TAIL_TOLERANCE};
use crate::seminorms::{classify, SemiNormSpec};
use crate::smalldev::{Estimator, SmallBallOptions, MIN_SAMPLES};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// A small-ball experiment. Every field has a default, and the resolved
/// configuration is echoed into the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub process: ProcessParams,
    pub seminorm: SemiNormSpec,
    pub epsilons: Vec<f64>,
    pub n_samples: u64,
    /// Grid level `J` (`2^J` cells on `[0, 1]`).
    pub level: u32,
    pub seed: u64,
    pub estimator: Estimator,
    pub tail_tolerance: f64,
    pub output: OutputPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            process: ProcessParams::rlp(2.0, 0.5)
                .expect("valid default")
                .normalized(true),
            seminorm: SemiNormSpec::sup(),
            epsilons: vec![0.5, 0.7, 1.0],
            n_samples: 10_000,
            level: 10,
            seed: 0,
            estimator: Estimator::Auto,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            output: OutputPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn options(&self) -> SmallBallOptions {
        SmallBallOptions {
            level: self.level,
            seed: self.seed,
            estimator: self.estimator,
            tail_tolerance: self.tail_tolerance,
        }
    }

    /// Checks every precondition of a small-ball run, naming the violated one.
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return invalid("epsilons: empty grid");
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return invalid(format!("epsilons: {e} is not a positive real"));
        }
        if self.n_samples < MIN_SAMPLES {
            return invalid(format!("n_samples = {} < {MIN_SAMPLES}", self.n_samples));
        }
        if !(1..=20).contains(&self.level) {
            return invalid(format!("level = {} outside 1..=20", self.level));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return invalid(format!("tail_tolerance = {} outside (0, 1)", self.tail_tolerance));
        }
        let class = classify(&self.seminorm);
        let h = self.process.hurst();
        let bound = class.beta + class.inv_p();
        if h <= bound {
            return Err(Error::NotApplicable(format!(
                "H <= beta + 1/p ({h} <= {bound}) for {}: rate theorem inapplicable",
                self.seminorm.label()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let c = ExperimentConfig::from_toml("seed = 7\n[seminorm]\nkind = \"LP\"\np = 2\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.seminorm, SemiNormSpec::lp(2.0).unwrap());
        assert_eq!(c.level, 10);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("seeds = 1").is_err());
    }

    #[test]
    fn inapplicable_rate_named() {
        let c = ExperimentConfig {
            seminorm: SemiNormSpec::pvar(2.0).unwrap(),
            ..Default::default()
        };
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("H <= beta + 1/p"), "{e}");
    }
}
