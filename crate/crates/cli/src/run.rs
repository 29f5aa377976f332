use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aml_core::io::{read_file, write_atomic};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Reads the JSON config (an empty object when absent) and applies `key.path=value` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<Value, CliError> {
    let mut value = match path {
        Some(p) => serde_json::from_slice(&read_file(p).map_err(CliError::input)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => Value::Object(Map::new()),
    };
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| CliError::Config(format!("override {o:?} is not KEY=VALUE")))?;
        set_path(&mut value, key, serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())))?;
    }
    Ok(value)
}

pub fn set_path(root: &mut Value, key: &str, new: Value) -> Result<(), CliError> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("empty segment in override key {key:?}")));
        }
        if !cur.is_object() {
            return Err(CliError::Config(format!("override {key:?}: {} is not an object", parts[..i].join("."))));
        }
        let map = cur.as_object_mut().unwrap();
        if i + 1 == parts.len() {
            map.insert(part.to_string(), new);
            return Ok(());
        }
        cur = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Deserializes into the subcommand's schema; unknown or missing fields are config errors.
pub fn typed<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("schema: {e}")))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the validated config serialized as JSON.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub config: Value,
}

/// Output directory, written files and timing for one subcommand invocation.
pub struct Run {
    subcommand: String,
    out: PathBuf,
    outputs: Vec<String>,
    start: Instant,
    config: Value,
    seed: Option<u64>,
}

impl Run {
    pub fn new<C: Serialize>(subcommand: &str, out: &Path, config: &C, seed: Option<u64>) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::Resource(format!("{}: {e}", out.display())))?;
        Ok(Self {
            subcommand: subcommand.into(),
            out: out.to_path_buf(),
            outputs: Vec::new(),
            start: Instant::now(),
            config: serde_json::to_value(config)?,
            seed,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.out
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.out.join(name), bytes).map_err(CliError::output)?;
        self.outputs.push(name.into());
        Ok(())
    }

    /// Buffers a writer-based serializer and stores the result as `name`.
    pub fn emit<E>(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<(), E>) -> Result<(), CliError>
    where
        E: Into<aml_core::io::IoError>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::output(e.into()))?;
        self.write(name, &buf)
    }

    pub fn record(&mut self, paths: Vec<PathBuf>) {
        self.outputs.extend(paths.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `{subcommand}.manifest.json`.
    pub fn finish(self) -> Result<PathBuf, CliError> {
        let bytes = serde_json::to_vec(&self.config)?;
        let hash: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        let manifest = RunManifest {
            subcommand: self.subcommand.clone(),
            config_hash: hash,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
            outputs: self.outputs,
            config: self.config,
        };
        let path = self.out.join(format!("{}.manifest.json", self.subcommand));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes()).map_err(CliError::output)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_create_nested_keys_and_parse_json() {
        let v = load_config(None, &["grid.n=8192".into(), "name=barrier".into(), "t_list=[1,2]".into()]).unwrap();
        assert_eq!(v, json!({"grid": {"n": 8192}, "name": "barrier", "t_list": [1, 2]}));
    }

    #[test]
    fn override_through_a_scalar_is_rejected() {
        let mut v = json!({"a": 1});
        assert!(matches!(set_path(&mut v, "a.b", json!(2)), Err(CliError::Config(_))));
        assert!(matches!(load_config(None, &["novalue".into()]), Err(CliError::Config(_))));
    }
}
