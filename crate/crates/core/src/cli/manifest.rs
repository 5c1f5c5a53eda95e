use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hydro::hex;

pub const MANIFEST_NAME: &str = "manifest.json";

/// A file produced by a command, held in memory until the run succeeds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub body: String,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        OutputFile {
            name: name.into(),
            body: body.into(),
        }
    }

    /// Data rows: lines after the header for CSV, lines for JSON lines,
    /// one for any other JSON document.
    pub fn rows(&self) -> usize {
        row_count(&self.name, &self.body)
    }
}

fn row_count(name: &str, body: &str) -> usize {
    let lines = body.lines().filter(|l| !l.is_empty()).count();
    if name.ends_with(".csv") {
        lines.saturating_sub(1)
    } else if name.ends_with(".jsonl") {
        lines
    } else {
        1
    }
}

fn sha256(body: &[u8]) -> String {
    hex(&Sha256::digest(body))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<ManifestEntry>,
    /// Derivation label to derived seed.
    pub seeds: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_passed: Option<bool>,
}

fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(body)?;
            f.sync_all()
        })
        .map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes every output, then the manifest describing them.
pub fn write_run(dir: &Path, files: &[OutputFile], manifest_base: RunManifest) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = manifest_base;
    manifest.outputs = files
        .iter()
        .map(|f| ManifestEntry {
            file: f.name.clone(),
            rows: f.rows(),
            sha256: sha256(f.body.as_bytes()),
        })
        .collect();
    for f in files {
        if f.name == MANIFEST_NAME || f.name.contains(['/', '\\']) {
            return Err(Error::InvalidExperiment(format!("illegal output name {}", f.name)));
        }
        write_atomic(&dir.join(&f.name), f.body.as_bytes())?;
    }
    let json = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    write_atomic(&dir.join(MANIFEST_NAME), json.as_bytes())?;
    Ok(manifest)
}

/// Problems found by [`self_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelfCheck {
    pub manifests: usize,
    pub files: usize,
    pub problems: Vec<String>,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Every file under `root` must be a manifest or be listed by exactly one
/// manifest, with matching row count and digest.
pub fn self_check(root: &Path) -> Result<SelfCheck> {
    let mut all = Vec::new();
    walk(root, &mut all)?;
    let mut report = SelfCheck::default();
    let mut references: BTreeMap<PathBuf, usize> = BTreeMap::new();
    for path in all.iter().filter(|p| p.file_name().is_some_and(|n| n == MANIFEST_NAME)) {
        report.manifests += 1;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: RunManifest = match serde_json::from_str(&text) {
            Ok(m) => m,
            Err(e) => {
                report.problems.push(format!("{}: unreadable manifest: {e}", path.display()));
                continue;
            }
        };
        let dir = path.parent().unwrap_or(Path::new("."));
        for entry in &manifest.outputs {
            let file = dir.join(&entry.file);
            *references.entry(file.clone()).or_default() += 1;
            match fs::read_to_string(&file) {
                Ok(body) => {
                    if row_count(&entry.file, &body) != entry.rows {
                        report.problems.push(format!("{}: row count differs from manifest", file.display()));
                    }
                    if sha256(body.as_bytes()) != entry.sha256 {
                        report.problems.push(format!("{}: digest differs from manifest", file.display()));
                    }
                }
                Err(_) => report.problems.push(format!("{}: listed but missing", file.display())),
            }
        }
    }
    for path in all.iter().filter(|p| p.file_name().is_some_and(|n| n != MANIFEST_NAME)) {
        report.files += 1;
        match references.get(path).copied().unwrap_or(0) {
            0 => report.problems.push(format!("{}: orphan output", path.display())),
            1 => {}
            k => report.problems.push(format!("{}: listed by {k} manifests", path.display())),
        }
    }
    Ok(report)
}
