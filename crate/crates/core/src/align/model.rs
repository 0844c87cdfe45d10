//! Monophone HMMs and the model-set file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gmm::DiagGmm;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::phones::{map_phones, Inventory, PhoneMapping, SILENCE};
use crate::scalar::Scalar;

pub const MODEL_FILE_VERSION: &str = "prosody-models-1";
pub const STATES_PER_PHONE: usize = 3;
pub const MAX_MIXTURES: usize = 5;

/// Emitting state with a self-loop and a single forward transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmState<T> {
    #[serde(flatten)]
    pub gmm: DiagGmm<T>,
    pub self_loop: T,
    pub forward: T,
}

impl<T: Scalar> HmmState<T> {
    pub fn new(gmm: DiagGmm<T>, self_loop: T) -> Self {
        Self {
            gmm,
            self_loop,
            forward: T::one() - self_loop,
        }
    }

    pub fn set_self_loop(&mut self, p: T) {
        self.self_loop = p;
        self.forward = T::one() - p;
    }
}

/// Three-state left-to-right phone model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonophoneModel<T> {
    pub label: String,
    pub states: Vec<HmmState<T>>,
}

impl<T: Scalar> MonophoneModel<T> {
    fn validate(&self, var_floor: T) -> Result<()> {
        let tol = T::lit(1e-9);
        if self.states.len() != STATES_PER_PHONE {
            return Err(Error::ModelFormat(format!(
                "phone '{}' has {} states, expected {STATES_PER_PHONE}",
                self.label,
                self.states.len()
            )));
        }
        for (i, s) in self.states.iter().enumerate() {
            let ctx = |what: &str| Error::ModelFormat(format!("phone '{}' state {i}: {what}", self.label));
            let k = s.gmm.n_components();
            if k == 0 || k > MAX_MIXTURES {
                return Err(ctx(&format!("{k} mixture components")));
            }
            if s.gmm.means.len() != k || s.gmm.variances.len() != k {
                return Err(ctx("component arrays differ in length"));
            }
            if (s.gmm.weights_sum() - T::one()).abs() > tol {
                return Err(ctx("mixture weights do not sum to 1"));
            }
            if (s.self_loop + s.forward - T::one()).abs() > tol {
                return Err(ctx("transition probabilities do not sum to 1"));
            }
            let dim = s.gmm.dim();
            if s.gmm.means.iter().chain(&s.gmm.variances).any(|v| v.len() != dim) {
                return Err(ctx("inconsistent dimension"));
            }
            if s.gmm.variances.iter().flatten().any(|&v| v < var_floor) {
                return Err(ctx("variance below floor"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelMode {
    LanguageDependent,
    LanguageIndependent,
}

/// Trained phone models plus everything needed to apply them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSet<T> {
    pub version: String,
    pub features: FeatureConfig,
    pub mode: ModelMode,
    pub mapping: Option<PhoneMapping>,
    pub inventory: Inventory,
    pub variance_floor: T,
    pub models: BTreeMap<String, MonophoneModel<T>>,
}

impl<T: Scalar> ModelSet<T> {
    pub fn new(features: FeatureConfig, inventory: Inventory, variance_floor: T) -> Self {
        Self {
            version: MODEL_FILE_VERSION.to_owned(),
            features,
            mode: ModelMode::LanguageDependent,
            mapping: None,
            inventory,
            variance_floor,
            models: BTreeMap::new(),
        }
    }

    /// Switches to language-independent mode. The inventory must already be
    /// the shared-label inventory.
    pub fn with_mapping(mut self, mapping: PhoneMapping) -> Self {
        self.mode = ModelMode::LanguageIndependent;
        self.mapping = Some(mapping);
        self
    }

    pub fn model(&self, label: &str) -> Result<&MonophoneModel<T>> {
        self.models
            .get(label)
            .ok_or_else(|| Error::MissingModel(label.to_owned()))
    }

    /// Translates a language's phone sequence into model labels.
    pub fn resolve<S: AsRef<str>>(&self, language: &str, phones: &[S]) -> Result<Vec<String>> {
        let labels = match (&self.mode, &self.mapping) {
            (ModelMode::LanguageIndependent, Some(mapping)) => map_phones(mapping, language, phones)?,
            _ => phones.iter().map(|p| p.as_ref().to_owned()).collect(),
        };
        for l in &labels {
            self.model(l)?;
        }
        Ok(labels)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_FILE_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version '{}'",
                self.version
            )));
        }
        if !self.models.contains_key(SILENCE) {
            return Err(Error::ModelFormat("no silence model".into()));
        }
        for label in self.inventory.labels() {
            if !self.models.contains_key(label) {
                return Err(Error::MissingModel(label.to_owned()));
            }
        }
        if let Some(mapping) = &self.mapping {
            for shared in mapping.shared_labels() {
                if !self.models.contains_key(shared) {
                    return Err(Error::MissingModel(shared.to_owned()));
                }
            }
        }
        let dims: std::collections::BTreeSet<usize> = self
            .models
            .values()
            .flat_map(|m| m.states.iter().map(|s| s.gmm.dim()))
            .collect();
        if dims.len() > 1 {
            return Err(Error::ModelFormat(format!("mixed feature dimensions {dims:?}")));
        }
        for (label, m) in &self.models {
            if &m.label != label {
                return Err(Error::ModelFormat(format!("key '{label}' holds model '{}'", m.label)));
            }
            m.validate(self.variance_floor)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
