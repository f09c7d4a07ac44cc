//! JSON run configuration, dotted-path overrides and line-numbered diagnostics.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qobserver_core::sim::Integrator;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndpa: Option<NdpaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub c_p: [f64; 2],
    #[serde(default)]
    pub x_p0_mean: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub beta: [f64; 2],
    #[serde(default)]
    pub omega_o: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvLayout {
    /// One long-format file with a `traj_id` column.
    #[default]
    Pooled,
    /// One file per trajectory.
    PerTrajectory,
}

fn one() -> usize {
    1
}

fn default_lag_max() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub seed: u64,
    pub n_trajectories: usize,
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_o0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_p0_cov: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub csv: CsvLayout,
    #[serde(default = "default_lag_max")]
    pub lag_max: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NdpaConfig {
    /// `[re, im]`
    pub epsilon: [f64; 2],
    #[serde(default)]
    pub phi: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    #[serde(default)]
    pub omega_o: f64,
    /// Overrides the solved beamsplitter angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

/// Either an explicit `grid` or an evenly spaced `start`/`stop`/`points` range.
/// An empty section selects the default grid.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

/// Replacement matrices for the realizability check; missing ones come from the observer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
}

fn default_sweep() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0]
}

fn default_competitors() -> usize {
    10_000
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemOverride>,
    #[serde(default = "default_sweep")]
    pub kappa_sweep: Vec<f64>,
    #[serde(default = "default_competitors")]
    pub competitors: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            system: None,
            kappa_sweep: default_sweep(),
            competitors: default_competitors(),
            seed: 0,
            tolerance: default_tolerance(),
        }
    }
}

/// The configuration file text, kept for locating fields in diagnostics.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: PathBuf,
    text: String,
    overridden: BTreeSet<String>,
}

impl Source {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            text: text.into(),
            overridden: BTreeSet::new(),
        }
    }

    /// 1-based line of the deepest key of `field` (a dotted path) found in
    /// the file, searching each segment after the previous one.
    pub fn line_of(&self, field: &str) -> Option<usize> {
        let mut from = 0;
        let mut found = None;
        for seg in field.split('.').filter(|s| !s.is_empty()) {
            if seg.parse::<usize>().is_ok() {
                continue;
            }
            let key = format!("\"{seg}\"");
            match self.text[from..].find(&key) {
                Some(pos) => {
                    from += pos + key.len();
                    found = Some(from);
                }
                None => break,
            }
        }
        found.map(|pos| self.text[..pos].matches('\n').count() + 1)
    }

    /// Validation error pointing at `field`.
    pub fn invalid(&self, field: &str, msg: impl Display) -> CliError {
        let overridden = self
            .overridden
            .iter()
            .any(|k| k == field || k.starts_with(&format!("{field}.")) || field.starts_with(&format!("{k}.")));
        let location = if overridden {
            format!("--set {field}")
        } else {
            match self.line_of(field) {
                Some(line) => format!("{}:{line}: {field}", self.path.display()),
                None => format!("{}: {field}", self.path.display()),
            }
        };
        CliError::Validation(format!("{location}: {msg}"))
    }

    /// Validation error for a required section that is absent.
    pub fn missing(&self, section: &str, command: &str) -> CliError {
        CliError::Validation(format!(
            "{}: missing section \"{section}\" required by `{command}`",
            self.path.display()
        ))
    }
}

/// Parses `key=value`; the value is read as JSON and falls back to a plain string.
pub fn parse_override(raw: &str) -> CliResult<(String, Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("--set {raw}: expected key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!("--set {raw}: malformed key")));
    }
    let value = serde_json::from_str(value.trim()).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

/// Writes `value` at dotted `key`, creating intermediate objects.
/// Numeric segments index into existing arrays.
pub fn apply_override(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let segments: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        let bad = |what: &str| CliError::Validation(format!("--set {key}: {what} at \"{seg}\""));
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| bad("expected an array index"))?;
                items.get_mut(idx).ok_or_else(|| bad("index out of range"))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut()
                    .expect("just created")
                    .entry(seg.to_string())
                    .or_insert(Value::Null)
            }
            _ => return Err(bad("cannot descend into a scalar")),
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    unreachable!("split yields at least one segment")
}

/// Parses the configuration text, applies overrides and deserializes it.
pub fn parse(source: &mut Source, overrides: &[String]) -> CliResult<Config> {
    let mut root: Value = serde_json::from_str(&source.text).map_err(|e| {
        CliError::Validation(format!(
            "{}:{}:{}: invalid JSON: {}",
            source.path.display(),
            e.line(),
            e.column(),
            e
        ))
    })?;
    if !root.is_object() {
        return Err(CliError::Validation(format!(
            "{}:1: top level must be a JSON object",
            source.path.display()
        )));
    }
    for raw in overrides {
        let (key, value) = parse_override(raw)?;
        apply_override(&mut root, &key, value)?;
        source.overridden.insert(key);
    }
    serde_path_to_error::deserialize(root).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        source.invalid(&field, inner)
    })
}

pub fn load(path: &Path, overrides: &[String]) -> CliResult<(Config, Source)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut source = Source::new(path, text);
    let cfg = parse(&mut source, overrides)?;
    Ok((cfg, source))
}
