//! Domain types shared across the crate.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One valence–arousal reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VAPoint {
    pub valence: f64,
    pub arousal: f64,
}

impl VAPoint {
    pub fn new(valence: f64, arousal: f64) -> Result<Self> {
        if !valence.is_finite() || !arousal.is_finite() {
            return Err(Error::NonFiniteValue {
                t: 0,
                field: "valence/arousal".into(),
            });
        }
        Ok(VAPoint { valence, arousal })
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.valence, self.arousal)
    }
}

/// Source channel of an affect reading. Ordering is the canonical channel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    #[serde(rename = "txt")]
    Text,
    #[serde(rename = "aud")]
    Audio,
    #[serde(rename = "vid")]
    Video,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Audio, Modality::Video];

    /// Short tag used in file formats (`txt`, `aud`, `vid`).
    pub fn tag(self) -> &'static str {
        match self {
            Modality::Text => "txt",
            Modality::Audio => "aud",
            Modality::Video => "vid",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Modality> {
        match tag {
            "txt" | "text" => Some(Modality::Text),
            "aud" | "audio" => Some(Modality::Audio),
            "vid" | "video" => Some(Modality::Video),
            _ => None,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The per-modality readings of one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    channels: BTreeMap<Modality, VAPoint>,
}

impl Observation {
    pub fn new(channels: BTreeMap<Modality, VAPoint>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InconsistentChannels {
                t: 0,
                detail: "observation has no channels".into(),
            });
        }
        Ok(Observation { channels })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Modality, VAPoint)>) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    pub fn get(&self, modality: Modality) -> Option<VAPoint> {
        self.channels.get(&modality).copied()
    }

    pub fn modalities(&self) -> Vec<Modality> {
        self.channels.keys().copied().collect()
    }

    pub fn channels(&self) -> &BTreeMap<Modality, VAPoint> {
        &self.channels
    }

    /// Channel vectors concatenated in canonical modality order.
    pub fn stacked(&self) -> Vec<f64> {
        self.channels
            .values()
            .flat_map(|p| [p.valence, p.arousal])
            .collect()
    }
}

/// The utterance-level observations of one conversation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversationSeries {
    id: String,
    modalities: Vec<Modality>,
    observations: Vec<Observation>,
    standardized: bool,
}

impl ConversationSeries {
    pub fn new(id: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        let first = observations.first().ok_or(Error::EmptySeries)?;
        let modalities = first.modalities();
        for (t, obs) in observations.iter().enumerate() {
            let found = obs.modalities();
            if found != modalities {
                return Err(Error::InconsistentChannels {
                    t,
                    detail: format!("expected {modalities:?}, found {found:?}"),
                });
            }
            for (m, p) in obs.channels() {
                if !p.valence.is_finite() || !p.arousal.is_finite() {
                    return Err(Error::NonFiniteValue {
                        t,
                        field: m.tag().to_string(),
                    });
                }
            }
        }
        Ok(ConversationSeries {
            id: id.into(),
            modalities,
            observations,
            standardized: false,
        })
    }

    pub(crate) fn with_flag(mut self, standardized: bool) -> Self {
        self.standardized = standardized;
        self
    }

    /// Marks the series as standardized without touching values. For data already z-scored upstream.
    pub fn assume_standardized(self) -> Self {
        self.with_flag(true)
    }

    /// Clears the standardized flag; values are untouched.
    pub fn reset_standardized(self) -> Self {
        self.with_flag(false)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Per-modality column view: `out[m][t]` is the channel `modalities()[m]` at time `t`.
    pub fn channel_vectors(&self) -> Vec<Vec<Vector2<f64>>> {
        self.modalities
            .iter()
            .map(|&m| {
                self.observations
                    .iter()
                    .map(|o| o.get(m).expect("uniform channel set").to_vector())
                    .collect()
            })
            .collect()
    }

    /// Stacked channel vectors per utterance (dimension `2 * modalities().len()`).
    pub fn stacked(&self) -> Vec<Vec<f64>> {
        self.observations.iter().map(Observation::stacked).collect()
    }
}

/// One integer regime label per utterance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LabelSequence {
    labels: Vec<usize>,
}

impl LabelSequence {
    pub fn new(labels: Vec<usize>) -> Self {
        LabelSequence { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Count of distinct label values.
    pub fn num_labels(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// One past the largest label (0 for an empty sequence).
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.labels.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: self.labels.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<usize>> for LabelSequence {
    fn from(labels: Vec<usize>) -> Self {
        LabelSequence::new(labels)
    }
}

impl std::ops::Index<usize> for LabelSequence {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.labels[i]
    }
}
