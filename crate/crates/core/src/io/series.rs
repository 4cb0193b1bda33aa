use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::types::{ConversationSeries, Modality, Observation, VAPoint};

use super::{read_text, series_id, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    Json,
}

impl SeriesFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => SeriesFormat::Json,
            _ => SeriesFormat::Csv,
        }
    }
}

/// Reads a series; the id is the file name up to its first dot.
pub fn read_series(path: &Path, format: SeriesFormat) -> Result<ConversationSeries> {
    let text = read_text(path)?;
    parse_series(&text, format, series_id(path))
}

pub fn parse_series(text: &str, format: SeriesFormat, id: impl Into<String>) -> Result<ConversationSeries> {
    let observations = match format {
        SeriesFormat::Csv => parse_csv(text)?,
        SeriesFormat::Json => parse_json(text)?,
    };
    if observations.is_empty() {
        return Err(Error::ParseError("series file has no rows".into()));
    }
    ConversationSeries::new(id, observations)
}

fn parse_index(raw: &str, row: usize) -> Result<usize> {
    raw.trim()
        .parse::<usize>()
        .map_err(|_| Error::ParseError(format!("row {row}: bad time index {raw:?}")))
}

fn check_index(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::NonContiguousIndex { expected, found });
    }
    Ok(())
}

fn parse_value(raw: &str, t: usize, field: &str) -> Result<f64> {
    let x = raw
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::ParseError(format!("t = {t}: {field} is not a number: {raw:?}")))?;
    if !x.is_finite() {
        return Err(Error::NonFiniteValue { t, field: field.to_string() });
    }
    Ok(x)
}

fn parse_csv(text: &str) -> Result<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("t") {
        return Err(Error::ParseError("header must start with column `t`".into()));
    }
    let rest = &header[1..];
    if rest.is_empty() || rest.len() % 2 != 0 {
        return Err(Error::ParseError(
            "header must list valence/arousal column pairs after `t`".into(),
        ));
    }
    let mut columns = Vec::new();
    for pair in rest.chunks(2) {
        let m = pair[0]
            .strip_prefix("v_")
            .and_then(Modality::from_tag)
            .filter(|m| pair[1] == format!("a_{}", m.tag()))
            .ok_or_else(|| Error::ParseError(format!("unexpected columns {}, {}", pair[0], pair[1])))?;
        if columns.contains(&m) {
            return Err(Error::ParseError(format!("duplicate modality {m}")));
        }
        columns.push(m);
    }

    let mut observations = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let t = parse_index(record.get(0).unwrap_or(""), row)?;
        check_index(t, row)?;
        if record.len() > header.len() {
            return Err(Error::ParseError(format!("t = {t}: too many fields")));
        }
        let mut channels = BTreeMap::new();
        for (c, &m) in columns.iter().enumerate() {
            let v = record.get(1 + 2 * c).unwrap_or("");
            let a = record.get(2 + 2 * c).unwrap_or("");
            if v.is_empty() || a.is_empty() {
                return Err(Error::InconsistentChannels {
                    t,
                    detail: format!("missing {} values", m.tag()),
                });
            }
            let point = VAPoint {
                valence: parse_value(v, t, &format!("v_{}", m.tag()))?,
                arousal: parse_value(a, t, &format!("a_{}", m.tag()))?,
            };
            channels.insert(m, point);
        }
        observations.push(Observation::new(channels)?);
    }
    Ok(observations)
}

fn parse_json(text: &str) -> Result<Vec<Observation>> {
    let rows: Vec<BTreeMap<String, Value>> = serde_json::from_str(text)?;
    let mut observations = Vec::with_capacity(rows.len());
    let mut expected: Option<Vec<Modality>> = None;
    for (row, obj) in rows.into_iter().enumerate() {
        let t = match obj.get("t") {
            Some(Value::Number(n)) => n
                .as_u64()
                .ok_or_else(|| Error::ParseError(format!("row {row}: bad time index {n}")))?
                as usize,
            _ => return Err(Error::ParseError(format!("row {row}: missing integer `t`"))),
        };
        check_index(t, row)?;
        let mut channels = BTreeMap::new();
        for (key, value) in &obj {
            if key == "t" {
                continue;
            }
            let m = Modality::from_tag(key)
                .ok_or_else(|| Error::ParseError(format!("t = {t}: unknown field {key:?}")))?;
            let pair = match value {
                Value::Array(p) if p.len() == 2 => p,
                Value::Null => continue,
                _ => {
                    return Err(Error::ParseError(format!(
                        "t = {t}: {key} must be a [valence, arousal] pair"
                    )))
                }
            };
            let num = |i: usize, field: &str| match &pair[i] {
                Value::Number(n) => n.as_f64().ok_or_else(|| Error::NonFiniteValue {
                    t,
                    field: field.to_string(),
                }),
                // serde_json cannot represent NaN or Inf; string spellings land here.
                Value::String(s) => parse_value(s, t, field),
                _ => Err(Error::ParseError(format!("t = {t}: {field} is not a number"))),
            };
            let point = VAPoint {
                valence: num(0, &format!("{key}.valence"))?,
                arousal: num(1, &format!("{key}.arousal"))?,
            };
            channels.insert(m, point);
        }
        let present: Vec<Modality> = channels.keys().copied().collect();
        match &expected {
            None => expected = Some(present),
            Some(e) if *e != present => {
                return Err(Error::InconsistentChannels {
                    t,
                    detail: format!("expected {e:?}, found {present:?}"),
                })
            }
            _ => {}
        }
        if channels.is_empty() {
            return Err(Error::InconsistentChannels { t, detail: "no channels".into() });
        }
        observations.push(Observation::new(channels)?);
    }
    Ok(observations)
}

/// Serializes a series; values print in shortest round-trip form.
pub fn series_to_string(series: &ConversationSeries, format: SeriesFormat) -> Result<String> {
    match format {
        SeriesFormat::Csv => {
            let mut out = String::from("t");
            for m in series.modalities() {
                out.push_str(&format!(",v_{0},a_{0}", m.tag()));
            }
            out.push('\n');
            for (t, o) in series.observations().iter().enumerate() {
                out.push_str(&t.to_string());
                for &m in series.modalities() {
                    let p = o.get(m).expect("uniform channels");
                    out.push_str(&format!(",{:?},{:?}", p.valence, p.arousal));
                }
                out.push('\n');
            }
            Ok(out)
        }
        SeriesFormat::Json => {
            let rows: Vec<Value> = series
                .observations()
                .iter()
                .enumerate()
                .map(|(t, o)| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("t".into(), Value::from(t));
                    for (m, p) in o.channels() {
                        obj.insert(m.tag().into(), Value::from(vec![p.valence, p.arousal]));
                    }
                    Value::Object(obj)
                })
                .collect();
            Ok(serde_json::to_string_pretty(&rows)? + "\n")
        }
    }
}

pub fn write_series(path: &Path, series: &ConversationSeries, format: SeriesFormat) -> Result<()> {
    write_text(path, &series_to_string(series, format)?)
}
