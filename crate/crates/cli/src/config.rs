//! Config files are JSON objects with the `ScenarioConfig` keys. A run
//! manifest is accepted too; its `config` and `args` are reused.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use wpr_secrecy::sim::ScenarioConfig;

use crate::error::CliError;
use crate::output::{RunArgs, RunManifest};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loaded {
    pub config: ScenarioConfig,
    /// Present when the file was a manifest.
    pub args: Option<RunArgs>,
}

fn decode<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        CliError::Usage(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

/// Parses and validates a config or manifest file.
pub fn parse_config(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    parse_config_str(&text, path)
}

pub fn parse_config_str(text: &str, path: &Path) -> Result<Loaded, CliError> {
    let value: Value = if text.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
    };
    if !value.is_object() {
        return Err(CliError::Usage(format!("{}: expected a JSON object", path.display())));
    }
    let loaded = if value.get("config").is_some() {
        let manifest: RunManifest = decode(value, path)?;
        Loaded {
            config: manifest.config,
            args: Some(manifest.args),
        }
    } else {
        Loaded {
            config: decode(value, path)?,
            args: None,
        }
    };
    loaded.config.validate()?;
    Ok(loaded)
}
