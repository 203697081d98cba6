//! Effective run configuration. Each value comes from the first source that
//! sets it: command-line flag, environment variable, config file, default.
//! Flags and environment variables are merged by clap; [`RunConfig::load`]
//! supplies the config file and defaults underneath them.

use std::path::Path;

use affectguard_core::anonymizer::AnonymizationParams;
use affectguard_core::pipeline::{PipelineConfig, RemoteConfig};
use affectguard_core::video::SigmaPolicy;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskingConfig {
    pub sigma_policy: SigmaPolicy,
    pub detector_url: Option<String>,
    pub detector_timeout_s: f64,
    pub detector_max_in_flight: usize,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self {
            sigma_policy: SigmaPolicy::default(),
            detector_url: None,
            detector_timeout_s: 30.0,
            detector_max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub anonymization: AnonymizationParams,
    pub masking: MaskingConfig,
    pub pipeline: PipelineConfig,
    pub mllm: RemoteConfig,
    pub judge: RemoteConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    /// Applies the global worker cap to every parallel stage.
    pub fn set_workers(&mut self, workers: usize) {
        self.pipeline.workers = workers;
        self.masking.detector_max_in_flight = self.masking.detector_max_in_flight.min(workers).max(1);
    }
}

pub fn set_if<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
