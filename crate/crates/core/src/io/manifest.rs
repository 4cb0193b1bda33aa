use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ConversationSeries;

use super::labels::{read_labels, LabelFile};
use super::series::{read_series, SeriesFormat};
use super::{read_text, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizationScope {
    #[default]
    PerConversation,
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Relative paths resolve against the manifest's directory.
    pub series: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub conversations: Vec<ManifestEntry>,
    #[serde(default)]
    pub standardization_scope: StandardizationScope,
}

impl CorpusManifest {
    pub fn from_str(text: &str) -> Result<Self> {
        let m: CorpusManifest = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        for e in &m.conversations {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::ParseError(format!("duplicate conversation id {:?}", e.id)));
            }
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_str(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &(serde_json::to_string_pretty(self)? + "\n"))
    }
}

/// One loaded conversation, unstandardized.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub series: ConversationSeries,
    pub reference: Option<LabelFile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub scope: StandardizationScope,
}

fn looks_like_manifest(path: &Path) -> bool {
    SeriesFormat::from_path(path) == SeriesFormat::Json
        && read_text(path)
            .map(|t| t.trim_start().starts_with('{'))
            .unwrap_or(false)
}

/// Loads either a manifest (a JSON object) or a single series file.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        )));
    }
    if !looks_like_manifest(path) {
        let series = read_series(path, SeriesFormat::from_path(path))?;
        return Ok(Corpus {
            entries: vec![CorpusEntry { series, reference: None }],
            scope: StandardizationScope::PerConversation,
        });
    }
    let manifest = CorpusManifest::read(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let mut entries = Vec::with_capacity(manifest.conversations.len());
    for e in &manifest.conversations {
        let sp = resolve(&e.series);
        let mut series = read_series(&sp, SeriesFormat::from_path(&sp))?;
        series.set_id(e.id.clone());
        let reference = match &e.labels {
            Some(lp) => {
                let f = read_labels(&resolve(lp))?;
                f.labels.check_len(series.len())?;
                Some(f)
            }
            None => None,
        };
        entries.push(CorpusEntry { series, reference });
    }
    Ok(Corpus {
        entries,
        scope: manifest.standardization_scope,
    })
}
