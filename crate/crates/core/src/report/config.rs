//! Run configuration: parsing, validation with JSON-pointer diagnostics and
//! the canonical digest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::shooting::ShootingOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Spectrum,
    Branches,
    ScalingGraph,
    StokesGraph,
    SecularScan,
    LinearExact,
}

impl Task {
    pub const ALL: [Task; 6] =
        [Task::Spectrum, Task::Branches, Task::ScalingGraph, Task::StokesGraph, Task::SecularScan, Task::LinearExact];

    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Branches => "branches",
            Task::ScalingGraph => "scaling_graph",
            Task::StokesGraph => "stokes_graph",
            Task::SecularScan => "secular_scan",
            Task::LinearExact => "linear_exact",
        }
    }

    fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRanges {
    pub n: Vec<u32>,
    pub g: f64,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Integrator tolerance of the shooting residual.
    pub shooting: f64,
    /// Acceptance tolerance on polished eigenvalues.
    pub root: f64,
    /// Integrator tolerance of the scaling-graph ODE.
    pub scaling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = ShootingOptions::default();
        Tolerances { shooting: s.tol, root: s.root_tol, scaling: 1e-10 }
    }
}

impl Tolerances {
    pub fn shooting_options(&self) -> ShootingOptions {
        ShootingOptions { tol: self.shooting, root_tol: self.root }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedOverrides {
    /// Mapped energies `[re, im]` for `stokes_graph`; default `E_c/10, E_c, 10 E_c`.
    #[serde(default)]
    pub stokes_emapped: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelRanges,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Modes per spectrum.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Not part of the digest.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed_overrides: Option<SeedOverrides>,
}

fn default_count() -> usize {
    12
}

fn invalid(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { pointer: pointer.into(), message: message.into() }
}

fn positive(v: &Value, pointer: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(invalid(pointer, "expected a finite positive number")),
    }
}

fn array<'a>(v: &'a Value, pointer: &str) -> Result<&'a Vec<Value>> {
    match v.as_array() {
        Some(a) if !a.is_empty() => Ok(a),
        _ => Err(invalid(pointer, "expected a non-empty array")),
    }
}

fn field<'a>(obj: &'a Value, key: &str, pointer: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| invalid(format!("{pointer}/{key}"), "required field missing"))
}

/// Checks the document against the rules of `configs/run.schema.json`.
pub fn validate_value(v: &Value) -> Result<()> {
    if !v.is_object() {
        return Err(invalid("", "expected an object"));
    }
    let model = field(v, "model", "")?;
    let ns = array(field(model, "n", "/model")?, "/model/n")?;
    let mut has_zero = false;
    for (k, x) in ns.iter().enumerate() {
        match x.as_u64() {
            Some(n) if n <= 15 => has_zero |= n == 0,
            _ => return Err(invalid(format!("/model/n/{k}"), "expected an integer in 0..=15")),
        }
    }
    positive(field(model, "g", "/model")?, "/model/g")?;
    let ls = array(field(model, "L", "/model")?, "/model/L")?;
    let mut prev = 0.0;
    for (k, x) in ls.iter().enumerate() {
        let l = positive(x, &format!("/model/L/{k}"))?;
        if k > 0 && l <= prev {
            return Err(invalid(format!("/model/L/{k}"), "L grid must be strictly increasing"));
        }
        prev = l;
    }
    if let Some(h) = model.get("hbar") {
        positive(h, "/model/hbar")?;
    }
    let tasks = array(field(v, "tasks", "")?, "/tasks")?;
    for (k, t) in tasks.iter().enumerate() {
        let pointer = format!("/tasks/{k}");
        let task = t.as_str().and_then(Task::from_name).ok_or_else(|| invalid(&pointer, "unknown task"))?;
        match task {
            Task::Branches if ls.len() < 2 => return Err(invalid("/model/L", "branches needs at least two L values")),
            Task::LinearExact if !has_zero => return Err(invalid(pointer, "linear_exact needs n = 0 in /model/n")),
            _ => {}
        }
    }
    if let Some(t) = v.get("tolerances") {
        for key in ["shooting", "root", "scaling"] {
            if let Some(x) = t.get(key) {
                positive(x, &format!("/tolerances/{key}"))?;
            }
        }
    }
    if let Some(c) = v.get("count") {
        match c.as_u64() {
            Some(c) if (1..=60).contains(&c) => {}
            _ => return Err(invalid("/count", "expected an integer in 1..=60")),
        }
    }
    if let Some(list) = v.pointer("/seed_overrides/stokes_emapped").filter(|x| !x.is_null()) {
        for (k, e) in array(list, "/seed_overrides/stokes_emapped")?.iter().enumerate() {
            let pair = e.as_array().filter(|a| a.len() == 2 && a.iter().all(|x| x.as_f64().is_some_and(f64::is_finite)));
            if pair.is_none() {
                return Err(invalid(format!("/seed_overrides/stokes_emapped/{k}"), "expected [re, im]"));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        validate_value(&v)?;
        serde_json::from_value(v).map_err(|e| invalid("", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| invalid("", format!("not JSON: {e}")))?;
        Self::from_value(v)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the config with defaults filled in and `output_dir` dropped.
    pub fn digest(&self) -> String {
        let canonical = RunConfig { output_dir: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn has(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }
}
