use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use wpr_secrecy::sim::{Algorithm, ScenarioConfig};

use crate::error::CliError;

/// Command-specific inputs that are not part of the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunArgs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_s_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_d_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub started_at_unix: u64,
    pub seed: u64,
    pub config: ScenarioConfig,
    #[serde(default)]
    pub args: RunArgs,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ScenarioConfig, args: RunArgs, started: SystemTime) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            started_at_unix: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            seed: config.seed,
            config: config.clone(),
            args,
            outputs: Vec::new(),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let err = |e: csv::Error| CliError::io(path.display(), e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::io(path.display(), e))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(path.display(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn manifest_round_trips() {
        let args = RunArgs {
            algorithm: Some(Algorithm::Loa),
            p_s_dbm: Some(30.0),
            ..RunArgs::default()
        };
        let m = RunManifest::new("single", &ScenarioConfig::default(), args, SystemTime::now());
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
    }
}
