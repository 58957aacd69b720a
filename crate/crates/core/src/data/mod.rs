//! Reading and writing delimited datasets, corpus manifests, and seeded
//! synthetic blob generation.

mod manifest;
mod synthetic;

pub use manifest::{CorpusManifest, ManifestEntry};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::preprocess::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Semicolon,
    Tab,
    /// Any run of spaces or tabs.
    Whitespace,
}

impl Delimiter {
    /// Comma if the line has one, then semicolon, then tab, else whitespace.
    pub fn detect(line: &str) -> Self {
        if line.contains(',') {
            Self::Comma
        } else if line.contains(';') {
            Self::Semicolon
        } else if line.contains('\t') && !line.trim().contains(' ') {
            Self::Tab
        } else {
            Self::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Vec<&'a str> {
        match self {
            Self::Comma => line.split(',').map(str::trim).collect(),
            Self::Semicolon => line.split(';').map(str::trim).collect(),
            Self::Tab => line.split('\t').map(str::trim).collect(),
            Self::Whitespace => line.split_whitespace().collect(),
        }
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "comma" | "," => Ok(Self::Comma),
            "semicolon" | ";" => Ok(Self::Semicolon),
            "tab" | "\t" | "\\t" => Ok(Self::Tab),
            "whitespace" | "space" | " " => Ok(Self::Whitespace),
            other => Err(format!("unknown delimiter `{other}`")),
        }
    }
}

impl fmt::Display for Delimiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Comma => "comma",
            Self::Semicolon => "semicolon",
            Self::Tab => "tab",
            Self::Whitespace => "whitespace",
        })
    }
}

/// How to read a delimited dataset file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Auto-detected from the first data line when `None`.
    pub delimiter: Option<Delimiter>,
    /// 1-based column holding the ground-truth label.
    pub label_column: Option<usize>,
    pub has_header: bool,
    /// Label value that marks ground-truth noise (encoded as `0`).
    pub noise_label: Option<String>,
}

/// Read a dataset from a file. The dataset is named after the file stem.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_dataset(&text, &name, options)
}

/// Parse delimited text. Blank lines and lines starting with `#` are skipped;
/// rows keep their file order.
pub fn parse_dataset(text: &str, name: &str, options: &LoadOptions) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    if options.has_header {
        lines.next();
    }
    let lines: Vec<(usize, &str)> = lines.collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::InvalidDataset(format!("{name}: no data rows")));
    };
    let delimiter = options.delimiter.unwrap_or_else(|| Delimiter::detect(first));
    let width = delimiter.split(first).len();
    if let Some(col) = options.label_column {
        if col == 0 || col > width {
            return Err(Error::InvalidDataset(format!(
                "{name}: label column {col} outside 1..={width}"
            )));
        }
    }
    let feature_count = width - usize::from(options.label_column.is_some());

    let mut values = Vec::with_capacity(lines.len() * feature_count);
    let mut raw_labels = Vec::new();
    for &(line_no, line) in &lines {
        let cells = delimiter.split(line);
        if cells.len() != width {
            return Err(Error::RaggedRow {
                source_name: name.to_string(),
                row: line_no,
                expected: width,
                found: cells.len(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            if Some(c + 1) == options.label_column {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                source_name: name.to_string(),
                row: line_no,
                column: c + 1,
                message: format!("`{cell}` is not numeric"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    source_name: name.to_string(),
                    row: line_no,
                    column: c + 1,
                    message: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
    }
    let points = Array2::from_shape_vec((lines.len(), feature_count), values)
        .map_err(|e| Error::InvalidDataset(format!("{name}: {e}")))?;
    let labels = options
        .label_column
        .map(|_| encode_labels(&raw_labels, options.noise_label.as_deref()));
    Dataset::new(name, points, labels)
}

/// Dictionary-encode label strings to `1..` in order of first appearance.
/// The noise label, if given, maps to `0`.
pub fn encode_labels(raw: &[String], noise: Option<&str>) -> Vec<usize> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    raw.iter()
        .map(|l| {
            if Some(l.as_str()) == noise {
                return 0;
            }
            let next = ids.len() + 1;
            *ids.entry(l.as_str()).or_insert(next)
        })
        .collect()
}

/// Write a dataset as comma-delimited text; labels (if any) go in a trailing
/// column. Values use the shortest representation that reads back exactly.
pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    let labels = dataset.labels();
    for (i, row) in dataset.points().rows().into_iter().enumerate() {
        let mut line = row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        if let Some(labels) = labels {
            line.push(',');
            line.push_str(&labels[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
