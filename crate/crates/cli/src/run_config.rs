//! JSON run configuration with dotted-key overrides.

use std::path::Path;

use serde_json::{Map, Value};
use wpcn_core::allocator::SolverOptions;
use wpcn_core::channel::ScenarioConfig;
use wpcn_core::{Result, WpcnError};

pub const SEED_ENV: &str = "WPCN_SEED";

/// Scenario, solver settings and seed for a single solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub solver: SolverOptions,
    pub seed: u64,
}

fn cfg_err(msg: impl Into<String>) -> WpcnError {
    WpcnError::Config(msg.into())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| WpcnError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))
}

/// Parses the value part of `key=value`: JSON when it parses, else a string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets `key.path=value` inside `root`, creating intermediate objects.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| cfg_err(format!("override {assignment:?} is not key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(cfg_err(format!("override key {key:?} is malformed")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj =
            node.as_object_mut().ok_or_else(|| cfg_err(format!("override {key:?} descends into a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node.as_object_mut().ok_or_else(|| cfg_err(format!("override {key:?} descends into a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parse_value(raw));
    Ok(())
}

/// Seed from the environment, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => {
            s.trim().parse().map(Some).map_err(|_| cfg_err(format!("{SEED_ENV}={s:?} is not an unsigned integer")))
        }
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    /// Builds a configuration from file contents. Precedence, lowest first:
    /// file values, `WPCN_SEED`, then `overrides`.
    pub fn from_value(mut root: Value, env_seed: Option<u64>, overrides: &[String]) -> Result<Self> {
        let obj = root.as_object_mut().ok_or_else(|| cfg_err("config must be a JSON object"))?;
        if let Some(seed) = env_seed {
            obj.insert("seed".into(), Value::from(seed));
        }
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let obj = root.as_object_mut().expect("checked above");
        let seed = match obj.remove("seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| cfg_err(format!("seed must be an unsigned integer, got {v}")))?,
        };
        let solver: SolverOptions = match obj.remove("solver") {
            None => SolverOptions::default(),
            Some(v) => serde_json::from_value(v).map_err(|e| cfg_err(format!("solver: {e}")))?,
        };
        solver.validate()?;
        let scenario: ScenarioConfig = serde_json::from_value(root).map_err(|e| cfg_err(format!("scenario: {e}")))?;
        scenario.validate()?;
        Ok(RunConfig { scenario, solver, seed })
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        Self::from_value(read_json(path)?, env_seed()?, overrides)
    }
}
