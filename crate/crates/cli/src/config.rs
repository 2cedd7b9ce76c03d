use std::fs;
use std::path::Path;

use inviscid_core::harness::{InitialData, SweepSpec};
use inviscid_core::{DomainSpec, ModelParams, PicardConfig};
use serde::Deserialize;

/// One experiment: model, discretization, data and, for sweeps, the damping
/// values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub domain: DomainSpec,
    pub steps: usize,
    pub data: InitialData,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b_values: Vec<f64>,
    #[serde(default)]
    pub floor_check: bool,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.picard.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.steps == 0 {
            return Err(ConfigError("invalid `steps`: must be at least 1".into()));
        }
        let domain = self
            .domain
            .build()
            .map_err(|e| ConfigError(format!("invalid `domain`: {e}")))?;
        self.data
            .build(&domain)
            .map_err(|e| ConfigError(format!("invalid `data`: {e}")))?;
        if let Some(sweep) = &self.sweep {
            self.sweep_spec(sweep)
                .validate()
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(())
    }

    pub fn sweep_spec(&self, sweep: &SweepConfig) -> SweepSpec {
        SweepSpec {
            params: self.model.clone(),
            b_values: sweep.b_values.clone(),
            data: self.data.clone(),
            domain: self.domain.clone(),
            steps: self.steps,
            picard: self.picard,
            floor_check: sweep.floor_check,
        }
    }
}
