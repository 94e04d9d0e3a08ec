//! Sectioned `key = value` configuration files (TOML). Every subcommand
//! reads its own section; command-line flags take precedence.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{PipelineError, Result};
use crate::formats::read_artifact;

pub const SECTIONS: [&str; 10] = ["gen", "label", "features", "pca", "train", "eval", "sweep", "al", "import", "plot"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    root: toml::Table,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let root: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let at = e.span().map(|s| format!("byte {}: ", s.start)).unwrap_or_default();
            PipelineError::format(path, format!("{at}{}", e.message()))
        })?;
        for (key, value) in &root {
            match (key.as_str(), value) {
                ("seed", toml::Value::Integer(s)) if *s >= 0 => {}
                ("seed", _) => return Err(PipelineError::format(path, "'seed' must be a non-negative integer")),
                (k, toml::Value::Table(_)) if SECTIONS.contains(&k) => {}
                (k, _) => return Err(PipelineError::format(path, format!("unknown top-level key or section '{k}'"))),
            }
        }
        Ok(Self { root })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_artifact(path, "--config")?;
        let text = String::from_utf8(bytes).map_err(|e| PipelineError::format(path, e.to_string()))?;
        Self::parse(&text, path)
    }

    pub fn seed(&self) -> Option<u64> {
        self.root.get("seed").and_then(toml::Value::as_integer).map(|s| s as u64)
    }

    /// Fills every unset field of `flags` from the named section.
    pub fn merge<T: Serialize + DeserializeOwned>(&self, section: &str, flags: &T) -> Result<T> {
        let Value::Object(mut merged) = serde_json::to_value(flags).expect("arguments serialize") else {
            unreachable!("argument structs serialize to objects")
        };
        if let Some(table) = self.root.get(section).and_then(toml::Value::as_table) {
            let Value::Object(file) = serde_json::to_value(table).expect("toml converts to json") else { unreachable!() };
            for (key, value) in file {
                let slot = merged.entry(key).or_insert(Value::Null);
                if slot.is_null() || slot == &Value::Bool(false) {
                    *slot = value;
                }
            }
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| PipelineError::Argument(format!("invalid [{section}] configuration: {e}")))
    }
}
