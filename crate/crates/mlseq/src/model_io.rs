//! Versioned JSON container for trained models.

use std::path::Path;

use mlseq_core::{MethodSpec, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, IoError, IoResult};

pub const FORMAT: &str = "mlseq-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub method: MethodSpec,
    pub seed: u64,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(method: MethodSpec, seed: u64, model: TrainedModel) -> Self {
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            method,
            seed,
            model,
        }
    }

    pub fn to_json(&self) -> IoResult<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> IoResult<Self> {
        let m: ModelFile = serde_json::from_str(text)?;
        if m.format != FORMAT {
            return Err(IoError::Format(format!("not a model file (format `{}`)", m.format)));
        }
        if m.version != VERSION {
            return Err(IoError::Format(format!(
                "model file version {} unsupported (expected {VERSION})",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> IoResult<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| IoError::file(path, e))
    }

    pub fn load(path: &Path) -> IoResult<Self> {
        Self::from_json(&read_to_string(path)?)
    }
}
