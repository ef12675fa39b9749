//! Experiment configuration: a flat TOML table with a schema version.
//!
//! ```toml
//! schema_version = 1
//! experiment = "simplex"        # simplex | tracking | center | projection-audit | complex | verify-suite
//! scenario = "flat-orthogonal-k1"
//! radii = [10.0, 20.0, 40.0]    # R-schedule, 3 to 16 increasing radii in (0, 1e4]
//! grid_m = 8                    # barycentric grid resolution, 1..=64
//! seed = 7
//! samples = 200                 # randomized instances, 1..=100000
//! k_max = 10000                 # orbit length for tracking, 1..=1000000
//! tolerance = 1e-6              # audit slack, (0, 0.1]
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scenarios;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simplex,
    Tracking,
    Center,
    ProjectionAudit,
    Complex,
    VerifySuite,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simplex => "simplex",
            ExperimentKind::Tracking => "tracking",
            ExperimentKind::Center => "center",
            ExperimentKind::ProjectionAudit => "projection-audit",
            ExperimentKind::Complex => "complex",
            ExperimentKind::VerifySuite => "verify-suite",
        }
    }
}

fn default_radii() -> Vec<f64> {
    (0..8).map(|i| 10.0 * f64::powi(2.0, i)).collect()
}
fn default_grid() -> usize {
    8
}
fn default_samples() -> usize {
    200
}
fn default_k_max() -> u64 {
    10_000
}
fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid_m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn scenario_supports(kind: ExperimentKind, name: &str) -> bool {
    use ExperimentKind::*;
    let simplex = [
        "flat-orthogonal-k1",
        "flat-orthogonal-k2",
        "H2-parabolic-cusp",
        "product-H2xH2-Z2",
        "degenerate-coincident",
    ];
    match kind {
        Simplex => simplex.contains(&name),
        ProjectionAudit => simplex[..4].contains(&name),
        Tracking => ["H2-boost-axis", "product-km-mixed", "H2-parabolic-cusp"].contains(&name),
        Center => ["H2-parabolic-cusp", "product-H2xH2-Z2"].contains(&name),
        Complex => ["heisenberg-chain", "flag-Z1Z2Z3"].contains(&name),
        VerifySuite => false,
    }
}

impl ExperimentConfig {
    /// The verify suite with default knobs.
    pub fn verify_suite(seed: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::VerifySuite,
            scenario: None,
            radii: default_radii(),
            grid_m: default_grid(),
            seed,
            samples: default_samples(),
            k_max: default_k_max(),
            tolerance: default_tolerance(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, msg: String| Err(ConfigError(format!("key `{key}`: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return err("schema_version", format!("{} is not supported, expected {SCHEMA_VERSION}", self.schema_version));
        }
        let r = &self.radii;
        if r.len() < 3 || r.len() > 16 {
            return err("radii", format!("needs 3 to 16 entries, got {}", r.len()));
        }
        if r.iter().any(|x| !(x.is_finite() && *x > 0.0 && *x <= 1e4)) || r.windows(2).any(|w| w[1] <= w[0]) {
            return err("radii", "entries must be increasing and lie in (0, 1e4]".into());
        }
        if !(1..=64).contains(&self.grid_m) {
            return err("grid_m", format!("{} outside 1..=64", self.grid_m));
        }
        if !(1..=100_000).contains(&self.samples) {
            return err("samples", format!("{} outside 1..=100000", self.samples));
        }
        if !(1..=1_000_000).contains(&self.k_max) {
            return err("k_max", format!("{} outside 1..=1000000", self.k_max));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 0.1) {
            return err("tolerance", format!("{} outside (0, 0.1]", self.tolerance));
        }
        match (&self.scenario, self.experiment) {
            (Some(_), ExperimentKind::VerifySuite) => err("scenario", "verify-suite runs the whole catalog".into()),
            (None, ExperimentKind::VerifySuite | ExperimentKind::Complex) => Ok(()),
            (None, k) => err("scenario", format!("experiment {} needs a scenario", k.name())),
            (Some(s), k) => {
                if scenarios::info(s).is_err() {
                    return err("scenario", format!("unknown scenario {s}; see `lab scenarios`"));
                }
                if !scenario_supports(k, s) {
                    return err("scenario", format!("scenario {s} does not support experiment {}", k.name()));
                }
                Ok(())
            }
        }
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
