//! Manifests and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::Global;
use crate::error::{Error, Result};
use crate::metrics::Convention;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub passed: bool,
    pub artifact: String,
    pub detail: String,
}

/// Run metadata stored next to every artifact. Only `wall_time_s` varies
/// between identical runs, and it never enters a CSV body.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub convention: Convention,
    pub tolerance: f64,
    pub domain: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteEntry>,
}

impl Manifest {
    pub(super) fn new(command: &'static str, g: &Global) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: g.seed,
            convention: g.convention.into(),
            tolerance: g.tol,
            domain: None,
            wall_time_s: 0.0,
            suites: Vec::new(),
        }
    }

    pub(super) fn finish(&self, started: Instant) -> Self {
        Manifest { wall_time_s: started.elapsed().as_secs_f64(), ..self.clone() }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn to_json(v: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Config(format!("serialization: {e}")))
}

/// `sweep.csv` -> `sweep.manifest.json`.
pub(super) fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

/// CSV body to `out` (manifest alongside) or to stdout.
pub(super) fn emit_csv(out: Option<&Path>, body: &str, manifest: &Manifest) -> Result<()> {
    match out {
        Some(p) => {
            write(p, body)?;
            write(&sidecar(p), &to_json(manifest)?)
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// `{"manifest": ..., "report": ...}` to `out` or stdout.
pub(super) fn emit_json(out: Option<&Path>, manifest: &Manifest, body: &impl Serialize) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a Manifest,
        report: &'a T,
    }
    let text = to_json(&Doc { manifest, report: body })?;
    match out {
        Some(p) => write(p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub(super) fn write_file(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}

pub(super) fn json(v: &impl Serialize) -> Result<String> {
    to_json(v)
}
