//! File formats: observation series, label files, fitted models and corpus manifests.
//!
//! Text is read as UTF-8 with CRLF normalized to LF.

mod labels;
mod manifest;
mod model;
mod series;

pub use labels::{parse_labels, read_labels, write_labels, LabelFile};
pub use manifest::{load_corpus, Corpus, CorpusEntry, CorpusManifest, ManifestEntry, StandardizationScope};
pub use model::{
    model_from_str, model_to_string, read_model, write_model, ModelFile, FORMAT_VERSION,
};
pub use series::{parse_series, read_series, series_to_string, write_series, SeriesFormat};

use std::path::Path;

use crate::error::Result;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let raw = std::fs::read_to_string(path)?;
    Ok(normalize_text(&raw))
}

pub(crate) fn normalize_text(raw: &str) -> String {
    raw.trim_start_matches('\u{feff}').replace("\r\n", "\n")
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// File stem without any `.series`-style secondary extension.
pub(crate) fn series_id(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("series");
    name.split('.').next().unwrap_or(name).to_string()
}
