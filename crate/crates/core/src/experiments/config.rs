use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::builtin::{newton, random_system, rescale_to_radius, unstable_3x3};
use crate::error::{Result, SysIdError};
use crate::estimators::Method;
use crate::lti::{NoiseConfig, SystemModel};

pub const DEFAULT_SEEDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    NewtonDelta(f64),
    #[serde(rename = "unstable_3x3")]
    Unstable3x3,
    Random {
        seed: u64,
        #[serde(default)]
        target_rho: Option<f64>,
    },
    Explicit(SystemModel),
}

impl SystemSpec {
    pub fn build(&self) -> Result<SystemModel> {
        match self {
            SystemSpec::NewtonDelta(d) => Ok(newton(*d)),
            SystemSpec::Unstable3x3 => Ok(unstable_3x3()),
            SystemSpec::Random { seed, target_rho } => {
                let sys = random_system(*seed, 3, 2, 2)?;
                match target_rho {
                    Some(rho) => rescale_to_radius(&sys, *rho),
                    None => Ok(sys),
                }
            }
            SystemSpec::Explicit(sys) => Ok(sys.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Number of rollouts at fixed length `t`.
    N { values: Vec<usize>, t: usize },
    /// Rollout length at fixed `n`.
    T { values: Vec<usize>, n: usize },
    /// Spectral radius of `A` at fixed `n`, `t`.
    Rho { values: Vec<f64>, n: usize, t: usize },
    /// Rollout length `T2` at fixed `n` and Markov length `t1`.
    RolloutLength { values: Vec<usize>, t1: usize, n: usize },
}

impl Sweep {
    pub fn axis_values(&self) -> Vec<f64> {
        match self {
            Sweep::N { values, .. } | Sweep::T { values, .. } | Sweep::RolloutLength { values, .. } => {
                values.iter().map(|&v| v as f64).collect()
            }
            Sweep::Rho { values, .. } => values.clone(),
        }
    }

    pub fn axis_label(&self) -> &'static str {
        match self {
            Sweep::N { .. } => "number of rollouts N",
            Sweep::T { .. } => "rollout length T",
            Sweep::Rho { .. } => "spectral radius rho(A)",
            Sweep::RolloutLength { .. } => "rollout length T2",
        }
    }

    /// `(N, T2, T1)` at an axis index.
    pub fn cell(&self, idx: usize) -> (usize, usize, usize) {
        match self {
            Sweep::N { values, t } => (values[idx], *t, *t),
            Sweep::T { values, n } => (*n, values[idx], values[idx]),
            Sweep::Rho { n, t, .. } => (*n, *t, *t),
            Sweep::RolloutLength { values, t1, n } => (*n, values[idx], *t1),
        }
    }

    fn validate(&self) -> Result<()> {
        let vals = self.axis_values();
        if vals.is_empty() {
            return Err(SysIdError::InvalidConfig("sweep values must be non-empty".into()));
        }
        if vals.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SysIdError::InvalidConfig(
                "sweep values must be strictly increasing".into(),
            ));
        }
        let zero = |name: &str| SysIdError::InvalidConfig(format!("{name} must be positive"));
        match self {
            Sweep::N { values, t } => {
                if *t == 0 {
                    return Err(zero("t"));
                }
                if values[0] == 0 {
                    return Err(zero("N"));
                }
            }
            Sweep::T { values, n } => {
                if *n == 0 {
                    return Err(zero("n"));
                }
                if values[0] == 0 {
                    return Err(zero("T"));
                }
            }
            Sweep::Rho { values, n, t } => {
                if *n == 0 || *t == 0 {
                    return Err(zero("n and t"));
                }
                if !(values[0] > 0.0) || values.iter().any(|v| !v.is_finite()) {
                    return Err(SysIdError::InvalidConfig(
                        "spectral radii must be positive and finite".into(),
                    ));
                }
            }
            Sweep::RolloutLength { values, t1, n } => {
                if *n == 0 || *t1 == 0 {
                    return Err(zero("n and t1"));
                }
                if values[0] < *t1 {
                    return Err(SysIdError::InvalidConfig(format!(
                        "rollout lengths must be at least t1 = {t1}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Quantity aggregated in the sweep summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `‖Ĝ − G‖`
    Error,
    /// `‖Ĝ − G‖ / ‖G‖`
    #[default]
    NormalizedError,
}

fn default_seeds() -> usize {
    DEFAULT_SEEDS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("sweep_out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemSpec,
    pub noise: NoiseConfig,
    pub sweep: Sweep,
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub metric: Metric,
    /// Worker threads; `None` uses every core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| SysIdError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| SysIdError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.noise
            .validate()
            .map_err(|e| SysIdError::InvalidConfig(e.to_string()))?;
        if self.seeds < 1 {
            return Err(SysIdError::InvalidConfig("seeds must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(SysIdError::InvalidConfig("at least one method is required".into()));
        }
        let mut sorted = self.methods.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.methods.len() {
            return Err(SysIdError::InvalidConfig("methods must be distinct".into()));
        }
        if self.workers == Some(0) {
            return Err(SysIdError::InvalidConfig("workers must be positive".into()));
        }
        if let SystemSpec::NewtonDelta(d) = self.system {
            if !d.is_finite() {
                return Err(SysIdError::InvalidConfig("newton delta must be finite".into()));
            }
        }
        Ok(())
    }
}
