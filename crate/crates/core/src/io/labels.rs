use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::LabelSequence;

use super::{read_text, write_text};

/// A label file: dense 0-based indices plus the original spelling of each index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelFile {
    pub labels: LabelSequence,
    /// `names[i]` is the label text that became index `i`.
    pub names: Vec<String>,
}

pub fn read_labels(path: &Path) -> Result<LabelFile> {
    parse_labels(&read_text(path)?)
}

/// Parses `t,label` rows. When every label is an integer they are re-indexed densely in
/// ascending numeric order; otherwise labels are interned by first appearance.
pub fn parse_labels(text: &str) -> Result<LabelFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "label" {
        return Err(Error::ParseError("label file header must be `t,label`".into()));
    }
    let mut raw = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let t: usize = record[0]
            .parse()
            .map_err(|_| Error::ParseError(format!("row {row}: bad time index {:?}", &record[0])))?;
        if t != row {
            return Err(Error::NonContiguousIndex { expected: row, found: t });
        }
        if record[1].is_empty() {
            return Err(Error::ParseError(format!("t = {t}: empty label")));
        }
        raw.push(record[1].to_string());
    }
    if raw.is_empty() {
        return Err(Error::ParseError("label file has no rows".into()));
    }

    let numeric: Option<Vec<i64>> = raw.iter().map(|s| s.parse().ok()).collect();
    let (labels, names) = match numeric {
        Some(values) => {
            let mut distinct = values.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let labels = values
                .iter()
                .map(|v| distinct.binary_search(v).expect("present"))
                .collect();
            (labels, distinct.iter().map(i64::to_string).collect())
        }
        None => {
            let mut index: BTreeMap<&str, usize> = BTreeMap::new();
            let mut names = Vec::new();
            let labels = raw
                .iter()
                .map(|s| {
                    *index.entry(s.as_str()).or_insert_with(|| {
                        names.push(s.clone());
                        names.len() - 1
                    })
                })
                .collect();
            (labels, names)
        }
    };
    let labels = LabelSequence::new(labels);
    Ok(LabelFile { labels, names })
}

/// Writes `t,label`; with `names`, index `i` is written as `names[i]`.
pub fn write_labels(path: &Path, labels: &LabelSequence, names: Option<&[String]>) -> Result<()> {
    let mut out = String::from("t,label\n");
    for (t, &l) in labels.labels().iter().enumerate() {
        let name = match names {
            Some(n) => n
                .get(l)
                .cloned()
                .ok_or_else(|| Error::InvalidConfig(format!("no name for label {l}")))?,
            None => l.to_string(),
        };
        if name.contains([',', '"', '\n']) {
            out.push_str(&format!("{t},\"{}\"\n", name.replace('"', "\"\"")));
        } else {
            out.push_str(&format!("{t},{name}\n"));
        }
    }
    write_text(path, &out)
}
