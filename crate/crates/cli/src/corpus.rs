use std::io::Write;
use std::path::{Path, PathBuf};

use regime_seg::io::{load_corpus, read_labels, LabelFile, StandardizationScope};
use regime_seg::standardize::{moments, standardize, standardize_with};
use regime_seg::{derived_seed, ConversationSeries, LabelSequence};

use crate::error::CliError;
use crate::Scope;

/// A standardized conversation with its optional reference labels.
pub struct Conversation {
    pub series: ConversationSeries,
    pub reference: Option<LabelFile>,
}

/// Loads `input`, then standardizes per conversation or with pooled moments.
pub fn load(input: &Path, scope: Option<Scope>, reference: Option<&Path>) -> Result<Vec<Conversation>, CliError> {
    let corpus = load_corpus(input)?;
    let scope = match scope {
        Some(Scope::PerConversation) => StandardizationScope::PerConversation,
        Some(Scope::Corpus) => StandardizationScope::Corpus,
        None => corpus.scope,
    };
    let mut entries = corpus.entries;
    if let Some(path) = reference {
        if entries.len() != 1 {
            return Err(CliError::Input(
                "--reference applies to single-series input; manifests list their own labels".into(),
            ));
        }
        let f = read_labels(path)?;
        f.labels.check_len(entries[0].series.len())?;
        entries[0].reference = Some(f);
    }
    let standardized: Vec<ConversationSeries> = match scope {
        StandardizationScope::PerConversation => entries
            .iter()
            .map(|e| standardize(&e.series))
            .collect::<Result<_, _>>()?,
        StandardizationScope::Corpus => {
            let refs: Vec<&ConversationSeries> = entries.iter().map(|e| &e.series).collect();
            let m = moments(&refs)?;
            entries
                .iter()
                .map(|e| standardize_with(&e.series, &m))
                .collect::<Result<_, _>>()?
        }
    };
    Ok(entries
        .into_iter()
        .zip(standardized)
        .map(|(e, series)| Conversation {
            series,
            reference: e.reference,
        })
        .collect())
}

/// Seed for conversation `index`, independent of scheduling order.
pub fn conversation_seed(seed: u64, index: usize) -> u64 {
    derived_seed(seed, index as u64)
}

pub fn labels_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.labels.csv"))
}

pub fn model_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.model.json"))
}

/// Reads `<dir>/<id>.labels.csv` and checks it covers the series.
pub fn decoded_labels(dir: &Path, series: &ConversationSeries) -> Result<LabelSequence, CliError> {
    let path = labels_path(dir, series.id());
    if !path.exists() {
        return Err(CliError::Input(format!(
            "no decode for conversation {:?} in {}",
            series.id(),
            dir.display()
        )));
    }
    let f = read_labels(&path)?;
    f.labels.check_len(series.len())?;
    Ok(f.labels)
}

/// Writes `text` to `path`, or to `out` when no path is given.
pub fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
