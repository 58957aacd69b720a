use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Delimiter, LoadOptions};
use crate::error::{Error, Result};

/// One dataset of a benchmark corpus.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    /// Relative paths are resolved against the manifest's directory.
    pub path: PathBuf,
    pub truth_k: usize,
    #[serde(default)]
    pub label_column: Option<usize>,
    #[serde(default)]
    pub delimiter: Option<Delimiter>,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub noise_label: Option<String>,
}

impl ManifestEntry {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: self.delimiter,
            label_column: self.label_column,
            has_header: self.header,
            noise_label: self.noise_label.clone(),
        }
    }

    pub fn is_available(&self) -> bool {
        self.path.is_file()
    }
}

/// A list of datasets with known cluster counts, read from TOML:
///
/// ```toml
/// [[dataset]]
/// name = "r15"
/// path = "R15.txt"
/// truth_k = 15
/// label_column = 3
/// delimiter = "whitespace"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    #[serde(default, rename = "dataset")]
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut manifest: Self = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        let mut seen = HashSet::new();
        for entry in &mut manifest.entries {
            if !seen.insert(entry.name.clone()) {
                return Err(Error::Manifest(format!("duplicate dataset name `{}`", entry.name)));
            }
            if entry.truth_k == 0 {
                return Err(Error::Manifest(format!("`{}`: truth_k must be >= 1", entry.name)));
            }
            if entry.label_column == Some(0) {
                return Err(Error::Manifest(format!(
                    "`{}`: label_column is 1-based",
                    entry.name
                )));
            }
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        Ok(manifest)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
