//! Corpus manifest: a TOML file naming each annotator's file plus options.
//!
//! ```toml
//! pos_sidecar = "switch_pos.tsv"   # optional
//! element_mode = "positions"       # or "forms"
//! threshold = 0.5
//!
//! [tokenizer]
//! punctuation = "split"            # or "attach"
//!
//! [[annotators]]
//! id = "1"
//! path = "annotator1.txt"
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use twt_core::metrics::SetMode;
use twt_core::tag_parser::{parse_annotation, ParseDiagnostic};
use twt_core::{AnnotatedDocument, Exec, TokenizerOptions};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub annotators: Vec<ManifestEntry>,
    #[serde(default)]
    pub tokenizer: TokenizerOptions,
    pub pos_sidecar: Option<PathBuf>,
    #[serde(default)]
    pub element_mode: SetMode,
    pub threshold: Option<f64>,
}

/// A parse diagnostic tagged with the file it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDiagnostic {
    pub annotator_id: String,
    pub path: String,
    #[serde(flatten)]
    pub diagnostic: ParseDiagnostic,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub manifest: Manifest,
    pub base_dir: PathBuf,
    pub digest: String,
    pub docs: Vec<AnnotatedDocument>,
    pub warnings: Vec<FileDiagnostic>,
}

impl LoadedCorpus {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.docs.iter().position(|d| d.annotator_id() == id)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn digest_part(hasher: &mut Sha256, label: &str, bytes: &[u8]) {
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

pub fn load_manifest(path: &Path) -> Result<(Manifest, Vec<u8>), CliError> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Input(format!("{} is not UTF-8: {e}", path.display())))?;
    let manifest: Manifest =
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid manifest {}: {e}", path.display())))?;
    if manifest.annotators.is_empty() {
        return Err(CliError::Input(format!("manifest {} lists no annotators", path.display())));
    }
    let mut seen = BTreeSet::new();
    for entry in &manifest.annotators {
        if !seen.insert(entry.id.as_str()) {
            return Err(CliError::Input(format!("duplicate annotator id {:?} in manifest", entry.id)));
        }
    }
    Ok((manifest, bytes))
}

/// Reads and parses every annotation file. Parse errors in any file fail the
/// whole load with all diagnostics collected.
pub fn load_corpus(manifest_path: &Path, exec: Exec) -> Result<LoadedCorpus, CliError> {
    let (manifest, manifest_bytes) = load_manifest(manifest_path)?;
    let base_dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut hasher = Sha256::new();
    digest_part(&mut hasher, "manifest", &manifest_bytes);
    let mut raws = Vec::with_capacity(manifest.annotators.len());
    for entry in &manifest.annotators {
        let path = base_dir.join(&entry.path);
        let bytes = read(&path)?;
        digest_part(&mut hasher, &entry.id, &bytes);
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::Input(format!("{} is not UTF-8: {e}", path.display())))?;
        raws.push(text);
    }
    if let Some(pos) = &manifest.pos_sidecar {
        digest_part(&mut hasher, "pos_sidecar", &read(&base_dir.join(pos))?);
    }
    let digest = format!("sha256:{}", hex::encode(hasher.finalize()));

    let parse = |(entry, raw): (&ManifestEntry, &String)| parse_annotation(raw, &entry.id);
    let pairs: Vec<(&ManifestEntry, &String)> = manifest.annotators.iter().zip(&raws).collect();
    let results: Vec<_> = match exec {
        Exec::Serial => pairs.into_iter().map(parse).collect(),
        Exec::Parallel => pairs.into_par_iter().map(parse).collect(),
    };

    let mut docs = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failed = false;
    for (entry, result) in manifest.annotators.iter().zip(results) {
        let tag = |d: ParseDiagnostic| FileDiagnostic {
            annotator_id: entry.id.clone(),
            path: entry.path.display().to_string(),
            diagnostic: d,
        };
        match result {
            Ok(out) => {
                diagnostics.extend(out.warnings.into_iter().map(tag));
                docs.push(out.document);
            }
            Err(failure) => {
                failed = true;
                diagnostics.extend(failure.diagnostics.into_iter().map(tag));
            }
        }
    }
    if failed {
        return Err(CliError::Parse { digest, diagnostics });
    }
    Ok(LoadedCorpus {
        manifest,
        base_dir,
        digest,
        docs,
        warnings: diagnostics,
    })
}
