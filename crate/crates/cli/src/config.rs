//! Experiment configuration: JSON file, flag overrides, environment.
//!
//! Precedence, lowest to highest: built-in defaults, then the `--config`
//! JSON file, then command-line flags. The output directory can be forced
//! from outside with the `OPELAB_OUTPUT_DIR` environment variable, which
//! wins over everything.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use opelab_core::instances::{max_r0, InstanceKind};

use crate::{CliError, Result};

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "OPELAB_OUTPUT_DIR";

/// A fully resolved experiment configuration.
///
/// `r0_frac` entries are fractions of the instance's maximal `r0`, so one
/// grid stays valid across every `(d, horizon)` combination.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    #[serde(with = "kind_name")]
    pub kind: InstanceKind,
    pub d: Vec<usize>,
    pub horizon: Vec<usize>,
    pub n: Vec<usize>,
    pub r0_frac: Vec<f64>,
    pub lambda: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Mixture weight for the on-policy smoothing of the upper-bound check.
    pub epsilon: f64,
    /// Failure probability in the upper-bound check.
    pub delta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: InstanceKind::Det,
            d: vec![4],
            horizon: vec![2, 3, 4, 5, 6, 7, 8],
            n: vec![1000],
            r0_frac: vec![1.0],
            lambda: vec![0.0],
            trials: 200,
            seed: 0,
            output_dir: PathBuf::from("out"),
            epsilon: 0.05,
            delta: 0.1,
        }
    }
}

/// The JSON-file shape: every field optional, unknown fields rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub kind: Option<String>,
    pub d: Option<Vec<usize>>,
    pub horizon: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
    pub r0_frac: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

mod kind_name {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        kind: &InstanceKind,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&kind.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<InstanceKind, D::Error> {
        let name = String::deserialize(d)?;
        parse_kind(&name).map_err(serde::de::Error::custom)
    }
}

pub fn parse_kind(name: &str) -> Result<InstanceKind> {
    match name {
        "det" => Ok(InstanceKind::Det),
        "sparse" => Ok(InstanceKind::Sparse),
        other => Err(CliError::usage(format!(
            "unknown instance kind {other:?} (expected \"det\" or \"sparse\")"
        ))),
    }
}

impl ExperimentConfig {
    /// Applies a partial configuration on top of `self`.
    pub fn apply(&mut self, partial: &PartialConfig) -> Result<()> {
        if let Some(kind) = &partial.kind {
            self.kind = parse_kind(kind)?;
        }
        if let Some(v) = &partial.d {
            self.d = v.clone();
        }
        if let Some(v) = &partial.horizon {
            self.horizon = v.clone();
        }
        if let Some(v) = &partial.n {
            self.n = v.clone();
        }
        if let Some(v) = &partial.r0_frac {
            self.r0_frac = v.clone();
        }
        if let Some(v) = &partial.lambda {
            self.lambda = v.clone();
        }
        if let Some(v) = partial.trials {
            self.trials = v;
        }
        if let Some(v) = partial.seed {
            self.seed = v;
        }
        if let Some(v) = &partial.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = partial.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = partial.delta {
            self.delta = v;
        }
        Ok(())
    }

    /// Loads defaults, then the optional config file, then flag overrides,
    /// then the environment override for the output directory.
    pub fn resolve(file: Option<&Path>, overrides: &PartialConfig) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = file {
            let partial: PartialConfig = crate::document::read_json(path)?;
            config.apply(&partial)?;
        }
        config.apply(overrides)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            config.output_dir = PathBuf::from(dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty()
            || self.horizon.is_empty()
            || self.n.is_empty()
            || self.r0_frac.is_empty()
            || self.lambda.is_empty()
        {
            return Err(CliError::usage("every grid must be nonempty"));
        }
        if self.trials == 0 {
            return Err(CliError::usage("trials must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(CliError::usage("epsilon must lie in [0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::usage("delta must lie in (0, 1)"));
        }
        for &f in &self.r0_frac {
            if !(0.0..=1.0).contains(&f) {
                return Err(CliError::usage("r0_frac entries must lie in [0, 1]"));
            }
        }
        for &l in &self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(CliError::usage("lambda entries must be nonnegative"));
            }
        }
        // Every grid point must satisfy the instance preconditions; build
        // errors here are usage errors, caught before any work starts.
        for &d in &self.d {
            for &horizon in &self.horizon {
                let r0 = max_r0(self.kind, d, horizon);
                match self.kind {
                    InstanceKind::Det => {
                        opelab_core::build_det_instance(d, horizon, r0)
                            .map_err(|e| CliError::usage(e.to_string()))?;
                    }
                    InstanceKind::Sparse => {
                        opelab_core::build_sparse_instance(d, horizon, r0)
                            .map_err(|e| CliError::usage(e.to_string()))?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let file = PartialConfig {
            trials: Some(50),
            seed: Some(9),
            ..Default::default()
        };
        crate::document::write_json(&path, &file).unwrap();

        let overrides = PartialConfig {
            trials: Some(75),
            ..Default::default()
        };
        let config = ExperimentConfig::resolve(Some(&path), &overrides).unwrap();
        assert_eq!(config.trials, 75); // flag wins
        assert_eq!(config.seed, 9); // file wins over default
    }

    #[test]
    fn invalid_grids_are_usage_errors() {
        let overrides = PartialConfig {
            d: Some(vec![]),
            ..Default::default()
        };
        let err = ExperimentConfig::resolve(None, &overrides).unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let overrides = PartialConfig {
            kind: Some("sparse".into()),
            horizon: Some(vec![2]), // below the sparse minimum
            d: Some(vec![6]),
            ..Default::default()
        };
        let err = ExperimentConfig::resolve(None, &overrides).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, "{\"trails\": 10}").unwrap();
        assert!(ExperimentConfig::resolve(Some(&path), &PartialConfig::default()).is_err());
    }
}
