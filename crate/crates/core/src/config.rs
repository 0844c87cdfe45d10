//! Tunable settings, loadable from TOML. Every key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::align::TrainConfig;
use crate::audio::FrameSpec;
use crate::error::{Error, Result};
use crate::events::{BreakThresholds, DEFAULT_SF_THRESHOLD};
use crate::langid::DEFAULT_EPSILON;
use crate::pitch::{ContourConfig, GciConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Framing for energy and spectral flatness. Alignment uses the framing
    /// stored with the models.
    pub frame: FrameSpec,
    /// Frames with spectral flatness at or above this are silent.
    pub silence_threshold: f64,
    pub breaks: BreakThresholds,
    pub contour: ContourConfig,
    pub gci: GciConfig,
    pub langid_epsilon: f64,
    /// Refinement passes run by `train`.
    pub iterations: usize,
    pub train: TrainConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            frame: FrameSpec::default(),
            silence_threshold: DEFAULT_SF_THRESHOLD,
            breaks: BreakThresholds::default(),
            contour: ContourConfig::default(),
            gci: GciConfig::default(),
            langid_epsilon: DEFAULT_EPSILON,
            iterations: 5,
            train: TrainConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
