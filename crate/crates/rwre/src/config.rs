//! Experiment configuration.
//!
//! A run is described by one JSON document. Missing fields take the
//! defaults of [`ExperimentConfig::default`]; command-line flags override
//! both. Precedence, lowest first: defaults, config file, flags.

use std::fs;
use std::path::{Path, PathBuf};

use rwre_core::ldp::{Flavor, ImportanceSettings};
use rwre_core::law::AtomSpec;
use rwre_core::walker::ENUMERATION_MAX_STEPS;
use rwre_core::{EnvironmentLaw, LawSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid law: {0}")]
    Law(#[from] rwre_core::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// How exact distributions of the averaged walk are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact enumeration only; `n` beyond the enumeration budget is an error.
    Enumeration,
    /// Enumeration where affordable, sampling beyond.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: LawSpec,
    pub seed: u64,
    /// Walk length for `speed` and `posterior-demo`.
    pub n: usize,
    pub replicas: u64,
    /// Velocities for `rate` and `entropy-bound`.
    pub grid: Vec<f64>,
    pub ladder: Vec<usize>,
    /// Half-width of the `S_n/n ≃ a` window in lattice sites.
    pub window: u32,
    pub flavor: Flavor,
    pub method: Method,
    pub importance: ImportanceSettings,
    /// Velocity for `superadd`.
    pub velocity: f64,
    pub pairs: Vec<(usize, usize)>,
    /// Strategy walk length for `entropy-bound`.
    pub horizon: usize,
    /// Increments shown by `posterior-demo`.
    pub path: Vec<i64>,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            law: LawSpec::Mixture { atoms: vec![AtomSpec { p: 0.7, w: 0.5 }, AtomSpec { p: 0.6, w: 0.5 }] },
            seed: 0,
            n: 1000,
            replicas: 200,
            grid: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            ladder: vec![250, 500, 1000, 2000],
            window: rwre_core::ldp::DEFAULT_WINDOW,
            flavor: Flavor::Quenched,
            method: Method::Auto,
            importance: ImportanceSettings::default(),
            velocity: 0.4,
            pairs: vec![(25, 25), (50, 50), (100, 100)],
            horizon: 2000,
            path: vec![1, -1, 1, 1, -1, -1, -1, 1],
            out: PathBuf::from("rwre-out"),
            format: Format::Both,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The validated law.
    pub fn environment_law(&self) -> Result<EnvironmentLaw, ConfigError> {
        Ok(EnvironmentLaw::from_spec(&self.law)?)
    }

    /// Checks that hold for every command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.environment_law()?;
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.n == 0 {
            return invalid("n must be at least 1".into());
        }
        if self.replicas < 2 {
            return invalid(format!("replicas must be at least 2, got {}", self.replicas));
        }
        if self.window == 0 {
            return invalid("window must be at least one lattice site".into());
        }
        if self.grid.is_empty() {
            return invalid("grid must contain at least one velocity".into());
        }
        if let Some(a) = self.grid.iter().find(|a| !(-1.0..=1.0).contains(*a)) {
            return invalid(format!("grid velocity {a} is outside [-1, 1]"));
        }
        if !(-1.0..=1.0).contains(&self.velocity) {
            return invalid(format!("velocity {} is outside [-1, 1]", self.velocity));
        }
        if self.ladder.is_empty() || self.ladder[0] == 0 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("ladder must be non-empty, positive and strictly increasing".into());
        }
        if self.importance.enumeration_max > ENUMERATION_MAX_STEPS {
            return invalid(format!(
                "importance.enumeration_max {} exceeds the enumeration budget of {ENUMERATION_MAX_STEPS} steps",
                self.importance.enumeration_max
            ));
        }
        if self.method == Method::Enumeration && self.flavor == Flavor::Averaged {
            if let Some(n) = self.ladder.iter().find(|&&n| n > ENUMERATION_MAX_STEPS) {
                return invalid(format!(
                    "ladder rung {n} requested with method \"enumeration\" exceeds the enumeration budget of {ENUMERATION_MAX_STEPS} steps"
                ));
            }
        }
        if self.pairs.iter().any(|&(k, l)| k == 0 || l == 0) {
            return invalid("superadditivity pairs need k, l >= 1".into());
        }
        if self.path.iter().any(|z| z.abs() != 1) {
            return invalid("path increments must be +1 or -1".into());
        }
        Ok(())
    }

    /// The config with output-only fields blanked, as hashed into every
    /// output file. Two runs that must produce identical numbers hash equal
    /// regardless of where or in which format they write.
    pub fn hashed_view(&self) -> Self {
        Self { out: PathBuf::new(), format: Format::Both, ..self.clone() }
    }
}
