//! TOML model-configuration files.
//!
//! A configuration names a built-in model, overrides its parameters, and can
//! attach a tabulated kernel transform:
//!
//! ```toml
//! model = "keller-segel"
//!
//! [params]
//! phi_scale = 1.0
//!
//! phi_hat = [[0.0, 1.0, 0.0], [1.0, 0.5, 0.0], [4.0, 0.06, 0.0]]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{builtin_with_kernel, ModelSpec, PhiHatTable};

/// Parsed model configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Built-in model name.
    pub model: String,
    /// Parameter overrides; unknown keys are rejected at build time.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Optional tabulated kernel transform as `(k, Re, Im)` triples.
    #[serde(default)]
    pub phi_hat: Option<Vec<(f64, f64, f64)>>,
}

impl ModelConfig {
    /// Parse a configuration from TOML text. Parse errors carry the TOML
    /// line/column diagnostics.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Read and parse a configuration file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Instantiate the configured model.
    pub fn build(&self) -> Result<ModelSpec> {
        let kernel = match &self.phi_hat {
            Some(samples) => Some(PhiHatTable::new(samples.clone())?),
            None => None,
        };
        builtin_with_kernel(&self.model, &self.params, kernel)
    }
}
