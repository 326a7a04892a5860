// SPDX-License-Identifier: Apache-2.0

//! Dataset manifests: `path,label[,source_id]` per line.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub audio_path: PathBuf,
    pub label: String,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Reads a manifest file. Relative audio paths are resolved against the
    /// manifest's directory. A first row starting with `path` is a header.
    /// Without a third column the source id is the file stem.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Data(format!("manifest: {e}")))?;
            let line = record.position().map_or(i as u64 + 1, |p| p.line());
            let err = |m: String| CliError::Data(format!("manifest line {line}: {m}"));
            if i == 0 && record.get(0) == Some("path") {
                continue;
            }
            if record.iter().all(str::is_empty) {
                continue;
            }
            if !(2..=3).contains(&record.len()) {
                return Err(err(format!("expected path,label[,source_id], got {} fields", record.len())));
            }
            let raw = PathBuf::from(&record[0]);
            if record[0].is_empty() {
                return Err(err("empty path".into()));
            }
            let label = record[1].to_string();
            if label.is_empty() {
                return Err(err("empty label".into()));
            }
            if label.contains([':', ',']) {
                return Err(err(format!("label {label:?} may not contain ':' or ','")));
            }
            let source_id = match record.get(2).filter(|s| !s.is_empty()) {
                Some(id) => id.to_string(),
                None => raw
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .ok_or_else(|| err("cannot derive a source id from the path".into()))?,
            };
            if !seen.insert(source_id.clone()) {
                return Err(err(format!("duplicate source id {source_id:?}")));
            }
            let audio_path = if raw.is_absolute() { raw } else { base.join(raw) };
            entries.push(ManifestEntry {
                audio_path,
                label,
                source_id,
            });
        }
        Ok(Manifest { entries })
    }
}
