//! Experiment configuration: a small hand-written JSON document binding a
//! distribution, a learner, a loss, and a size range, plus optional engine and
//! Monte Carlo settings.

use monotone_lab_core::{DiscreteDistribution, Engine, LearnerSpec, LossKind, NRange};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub distribution: DiscreteDistribution,
    pub learner: LearnerSpec,
    pub loss: LossKind,
    pub n_range: NRange,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McConfig>,
}

fn default_tolerance() -> f64 {
    monotone_lab_core::DEFAULT_DELTA_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub max_compositions: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_compositions: Engine::default().max_compositions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub replicates: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.learner
            .validate()
            .map_err(|e| format!("invalid learner: {e}"))?;
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(format!(
                "tolerance must be finite and >= 0, got {}",
                self.tolerance
            ));
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.replicates == 0 {
                return Err("monte_carlo.replicates must be >= 1".to_string());
            }
        }
        Ok(())
    }

    pub fn engine(&self) -> Engine {
        Engine {
            max_compositions: self.engine.max_compositions,
        }
    }
}
