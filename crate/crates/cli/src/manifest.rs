use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use ldg_core::grid::io::sidecar_path;
use ldg_core::{Domain, DomainGrid};

use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct GridDescriptor {
    pub domain: Domain,
    pub resolution: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl From<&DomainGrid> for GridDescriptor {
    fn from(g: &DomainGrid) -> Self {
        GridDescriptor { domain: g.domain, resolution: g.resolution, nx: g.nx, ny: g.ny, h: g.h }
    }
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub grid: Option<GridDescriptor>,
    pub material: Option<Value>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub code_version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize) -> Self {
        RunManifest {
            command: command.into(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            grid: None,
            material: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: 0.0,
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Writes `<stem>.meta.json` next to `output` with the manifest and the command's results.
pub fn write_sidecar(output: &Path, manifest: &RunManifest, results: Value) -> Result<PathBuf, Failure> {
    let path = sidecar_path(output);
    write_json(&path, &serde_json::json!({ "manifest": manifest, "results": results }))?;
    Ok(path)
}
