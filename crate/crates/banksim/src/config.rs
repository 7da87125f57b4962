//! Configuration loading: built-in defaults, then a TOML file, then
//! `key=value` overrides.

use std::fs;
use std::path::Path;

use banksim_core::SimConfig;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Parses a TOML document. Missing keys keep their defaults; unknown keys
/// are rejected.
pub fn from_toml_str(text: &str) -> Result<SimConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

pub fn read_file(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Applies one `key=value` override.
pub fn apply_override(config: &mut SimConfig, assignment: &str) -> Result<(), CliError> {
    let (key, value) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override {assignment:?} is not of the form key=value"))
    })?;
    config.set_field(key.trim(), value)?;
    Ok(())
}

/// Defaults, overridden by `path` if given, overridden by `overrides`.
/// The result is not validated yet.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig, CliError> {
    let mut config = match path {
        Some(p) => read_file(p)?,
        None => SimConfig::default(),
    };
    for o in overrides {
        apply_override(&mut config, o)?;
    }
    Ok(config)
}

/// Hex SHA-256 of the canonical JSON encoding of every effective parameter.
pub fn config_hash(config: &SimConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn to_toml(config: &SimConfig) -> String {
    toml::to_string(config).expect("config serializes")
}
