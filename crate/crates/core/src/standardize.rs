//! Per-channel z-scoring.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{ConversationSeries, Modality, Observation, VAPoint};

/// Mean and population standard deviation of one channel dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMoments {
    pub mean: f64,
    pub std: f64,
}

impl ChannelMoments {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        ChannelMoments {
            mean,
            std: var.sqrt(),
        }
    }

    fn apply(&self, x: f64) -> f64 {
        // Constant channels map to zero.
        if self.std <= f64::EPSILON * self.mean.abs().max(1.0) {
            0.0
        } else {
            (x - self.mean) / self.std
        }
    }
}

/// Valence and arousal moments for every channel of a series (or corpus).
pub type Moments = BTreeMap<Modality, [ChannelMoments; 2]>;

/// Population moments of every channel dimension, pooled over all given series.
pub fn moments(series: &[&ConversationSeries]) -> Result<Moments> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    for s in series {
        if s.modalities() != first.modalities() {
            return Err(Error::InconsistentChannels {
                t: 0,
                detail: format!("series {} has channels {:?}", s.id(), s.modalities()),
            });
        }
    }
    let mut out = Moments::new();
    for &m in first.modalities() {
        let points: Vec<_> = series
            .iter()
            .flat_map(|s| s.observations().iter().map(move |o| o.get(m).expect("uniform channel set")))
            .collect();
        let v: Vec<f64> = points.iter().map(|p| p.valence).collect();
        let a: Vec<f64> = points.iter().map(|p| p.arousal).collect();
        out.insert(m, [ChannelMoments::of(&v), ChannelMoments::of(&a)]);
    }
    Ok(out)
}

/// Z-scores each channel dimension of `series` independently over time.
pub fn standardize(series: &ConversationSeries) -> Result<ConversationSeries> {
    if series.is_standardized() {
        return Err(Error::AlreadyStandardized);
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let m = moments(&[series])?;
    standardize_with(series, &m)
}

/// Z-scores `series` with externally computed moments (corpus-wide scope).
pub fn standardize_with(series: &ConversationSeries, moments: &Moments) -> Result<ConversationSeries> {
    if series.is_standardized() {
        return Err(Error::AlreadyStandardized);
    }
    let observations = series
        .observations()
        .iter()
        .map(|o| {
            let channels = o
                .channels()
                .iter()
                .map(|(&m, p)| {
                    let [mv, ma] = moments.get(&m).ok_or_else(|| Error::ChannelMismatch {
                        expected: moments.keys().copied().collect(),
                        found: o.modalities(),
                    })?;
                    Ok((
                        m,
                        VAPoint {
                            valence: mv.apply(p.valence),
                            arousal: ma.apply(p.arousal),
                        },
                    ))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            Observation::new(channels)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConversationSeries::new(series.id(), observations)?.with_flag(true))
}
