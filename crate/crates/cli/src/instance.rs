//! Instance files: JSON serialization of [`InstanceSpec`] plus the fixed
//! verification corpus.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use submax::generate::INSTANCE_VERSION;
use submax::{verification_corpus, InstanceSpec};

/// Reads and validates an instance file.
pub fn load(path: &Path) -> Result<InstanceSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    let spec: InstanceSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance file {}", path.display()))?;
    if spec.version != INSTANCE_VERSION {
        bail!(
            "instance file {} has version {}, this build reads version {}",
            path.display(),
            spec.version,
            INSTANCE_VERSION
        );
    }
    spec.instantiate()
        .with_context(|| format!("validating instance file {}", path.display()))?;
    Ok(spec)
}

/// Writes an instance as pretty JSON with a trailing newline.
pub fn save(path: &Path, spec: &InstanceSpec) -> Result<()> {
    let mut text = serde_json::to_string_pretty(spec)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    label: String,
    n: usize,
    seed: u64,
}

/// Writes the fixed verification corpus into `dir`, one JSON file per
/// instance plus a `manifest.json` index, and returns how many instances
/// were written.
pub fn write_corpus(dir: &Path) -> Result<usize> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let corpus = verification_corpus();
    let mut manifest = Vec::with_capacity(corpus.len());
    for spec in &corpus {
        let label = spec.label();
        let file = format!("{label}.json");
        save(&dir.join(&file), spec)?;
        manifest.push(ManifestEntry { file, label, n: spec.n, seed: spec.seed });
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, text)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(corpus.len())
}
