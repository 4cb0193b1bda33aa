//! Agreement, temporal and geometric measures of a decoded label sequence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alignment::align;
use crate::error::{Error, Result};
use crate::types::{ConversationSeries, LabelSequence};

/// A maximal run of one label, `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub label: usize,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Maximal constant-label runs in order.
pub fn segments(labels: &LabelSequence) -> Vec<Segment> {
    let l = labels.labels();
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=l.len() {
        if t == l.len() || l[t] != l[start] {
            out.push(Segment {
                label: l[start],
                start,
                end: t - 1,
            });
            start = t;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalStats {
    pub mean_regime_duration: f64,
    pub single_utterance_fraction: f64,
    pub regime_shifts: usize,
    pub effective_regimes: usize,
    pub dominant_regime_share: f64,
}

pub fn temporal_stats(labels: &LabelSequence) -> Result<TemporalStats> {
    if labels.is_empty() {
        return Err(Error::EmptySeries);
    }
    let segs = segments(labels);
    let t = labels.len() as f64;
    let n = segs.len() as f64;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels.labels() {
        *counts.entry(l).or_default() += 1;
    }
    Ok(TemporalStats {
        mean_regime_duration: t / n,
        single_utterance_fraction: segs.iter().filter(|s| s.len() == 1).count() as f64 / n,
        regime_shifts: segs.len() - 1,
        effective_regimes: counts.len(),
        dominant_regime_share: *counts.values().max().expect("non-empty") as f64 / t,
    })
}

fn entropy(counts: impl Iterator<Item = f64> + Clone) -> f64 {
    let total: f64 = counts.clone().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .filter(|&c| c > 0.0)
        .map(|c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum()
}

/// Occupancy-weighted entropy of the empirical transition rows, normalized by
/// `ln(effective regimes)`; 0 with a single regime.
pub fn transition_entropy(labels: &LabelSequence) -> Result<f64> {
    if labels.len() < 2 {
        return Err(Error::DegenerateInput(
            "transition entropy needs at least two utterances".into(),
        ));
    }
    let effective = labels.num_labels();
    if effective < 2 {
        return Ok(0.0);
    }
    let mut rows: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for w in labels.labels().windows(2) {
        *rows.entry(w[0]).or_default().entry(w[1]).or_default() += 1.0;
    }
    let pairs = (labels.len() - 1) as f64;
    let h: f64 = rows
        .values()
        .map(|row| {
            let n: f64 = row.values().sum();
            n / pairs * entropy(row.values().copied())
        })
        .sum();
    Ok(h / (effective as f64).ln())
}

/// Length-weighted mean, over predicted segments, of the largest single-reference-label
/// fraction inside each segment.
pub fn temporal_purity(labels: &LabelSequence, reference: &LabelSequence) -> Result<f64> {
    reference.check_len(labels.len())?;
    if labels.is_empty() {
        return Err(Error::EmptySeries);
    }
    let r = reference.labels();
    let pure: usize = segments(labels)
        .iter()
        .map(|s| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &x in &r[s.start..=s.end] {
                *counts.entry(x).or_default() += 1;
            }
            *counts.values().max().expect("non-empty segment")
        })
        .sum();
    Ok(pure as f64 / labels.len() as f64)
}

/// Normalized mutual information, `I(a; b) / sqrt(H(a) H(b))`, natural logs.
///
/// Two constant sequences score 1; a constant sequence against a varying one scores 0.
pub fn nmi(a: &LabelSequence, b: &LabelSequence) -> Result<f64> {
    b.check_len(a.len())?;
    if a.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ca: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
    }
    match (ca.len(), cb.len()) {
        (1, 1) => return Ok(1.0),
        (1, _) | (_, 1) => return Ok(0.0),
        _ => {}
    }
    let ha = entropy(ca.values().copied());
    let hb = entropy(cb.values().copied());
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| c / n * (c * n / (ca[&x] * cb[&y])).ln())
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

fn f1(tp: f64, n_pred: f64, n_ref: f64) -> f64 {
    if n_pred == 0.0 || n_ref == 0.0 || tp == 0.0 {
        return 0.0;
    }
    let p = tp / n_pred;
    let r = tp / n_ref;
    2.0 * p * r / (p + r)
}

/// F1 over segments; a predicted segment counts only if an identical
/// `(label, start, end)` reference segment exists.
pub fn segment_f1(pred_aligned: &LabelSequence, reference: &LabelSequence) -> Result<f64> {
    reference.check_len(pred_aligned.len())?;
    let ps = segments(pred_aligned);
    let rs: BTreeSet<Segment> = segments(reference).into_iter().collect();
    let tp = ps.iter().filter(|s| rs.contains(s)).count();
    Ok(f1(tp as f64, ps.len() as f64, rs.len() as f64))
}

/// Indices `t` with `labels[t] != labels[t - 1]`.
pub fn boundaries(labels: &LabelSequence) -> Vec<usize> {
    labels
        .labels()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// F1 over regime boundaries, matched one-to-one, nearest pairs first, within `tol`
/// utterances. Two sequences without boundaries score 1.
pub fn boundary_f1(pred: &LabelSequence, reference: &LabelSequence, tol: usize) -> Result<f64> {
    reference.check_len(pred.len())?;
    let pb = boundaries(pred);
    let rb = boundaries(reference);
    if pb.is_empty() && rb.is_empty() {
        return Ok(1.0);
    }
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &p) in pb.iter().enumerate() {
        for (j, &r) in rb.iter().enumerate() {
            let d = p.abs_diff(r);
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_unstable();
    let mut used_p = vec![false; pb.len()];
    let mut used_r = vec![false; rb.len()];
    let mut tp = 0usize;
    for (_, i, j) in candidates {
        if !used_p[i] && !used_r[j] {
            used_p[i] = true;
            used_r[j] = true;
            tp += 1;
        }
    }
    Ok(f1(tp as f64, pb.len() as f64, rb.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryStats {
    pub intra_regime_variance: f64,
    pub inter_regime_centroid_distance: f64,
}

/// Regime centroids over stacked channel vectors: mean pairwise centroid distance, and
/// occupancy-weighted mean squared distance of points to their centroid.
pub fn geometry_stats(labels: &LabelSequence, series: &ConversationSeries) -> Result<GeometryStats> {
    labels.check_len(series.len())?;
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let points = series.stacked();
    let dim = points[0].len();
    let mut groups: BTreeMap<usize, Vec<&Vec<f64>>> = BTreeMap::new();
    for (p, &l) in points.iter().zip(labels.labels()) {
        groups.entry(l).or_default().push(p);
    }
    let centroids: Vec<Vec<f64>> = groups
        .values()
        .map(|g| {
            (0..dim)
                .map(|d| g.iter().map(|p| p[d]).sum::<f64>() / g.len() as f64)
                .collect()
        })
        .collect();
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let intra: f64 = groups
        .values()
        .zip(&centroids)
        .map(|(g, c)| g.iter().map(|p| dist2(p, c)).sum::<f64>())
        .sum::<f64>()
        / points.len() as f64;
    let k = centroids.len();
    let inter = if k < 2 {
        0.0
    } else {
        let mut sum = 0.0;
        for a in 0..k {
            for b in (a + 1)..k {
                sum += dist2(&centroids[a], &centroids[b]).sqrt();
            }
        }
        sum / (k * (k - 1) / 2) as f64
    };
    Ok(GeometryStats {
        intra_regime_variance: intra,
        inter_regime_centroid_distance: inter,
    })
}

/// Every measure for one decoded sequence. Reference-dependent fields are absent when no
/// reference was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub segment_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nmi: Option<f64>,
    pub mean_regime_duration: f64,
    pub single_utterance_fraction: f64,
    pub regime_shifts: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub temporal_purity: Option<f64>,
    pub transition_entropy: f64,
    pub intra_regime_variance: f64,
    pub inter_regime_centroid_distance: f64,
    pub effective_regimes: usize,
    pub dominant_regime_share: f64,
}

impl MetricReport {
    /// `(name, value)` for every populated field, in serialization order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let mut opt = |name, v: Option<f64>| {
            if let Some(v) = v {
                out.push((name, v));
            }
        };
        opt("segment_f1", self.segment_f1);
        opt("boundary_f1", self.boundary_f1);
        opt("nmi", self.nmi);
        out.push(("mean_regime_duration", self.mean_regime_duration));
        out.push(("single_utterance_fraction", self.single_utterance_fraction));
        out.push(("regime_shifts", self.regime_shifts as f64));
        if let Some(v) = self.temporal_purity {
            out.push(("temporal_purity", v));
        }
        out.push(("transition_entropy", self.transition_entropy));
        out.push(("intra_regime_variance", self.intra_regime_variance));
        out.push(("inter_regime_centroid_distance", self.inter_regime_centroid_distance));
        out.push(("effective_regimes", self.effective_regimes as f64));
        out.push(("dominant_regime_share", self.dominant_regime_share));
        out
    }
}

/// Aligns `pred` to `reference` (when given) and computes the full report.
pub fn evaluate(
    pred: &LabelSequence,
    reference: Option<&LabelSequence>,
    series: &ConversationSeries,
) -> Result<MetricReport> {
    pred.check_len(series.len())?;
    let temporal = temporal_stats(pred)?;
    let geometry = geometry_stats(pred, series)?;
    let entropy = if pred.len() < 2 { 0.0 } else { transition_entropy(pred)? };
    let mut report = MetricReport {
        segment_f1: None,
        boundary_f1: None,
        nmi: None,
        mean_regime_duration: temporal.mean_regime_duration,
        single_utterance_fraction: temporal.single_utterance_fraction,
        regime_shifts: temporal.regime_shifts,
        temporal_purity: None,
        transition_entropy: entropy,
        intra_regime_variance: geometry.intra_regime_variance,
        inter_regime_centroid_distance: geometry.inter_regime_centroid_distance,
        effective_regimes: temporal.effective_regimes,
        dominant_regime_share: temporal.dominant_regime_share,
    };
    if let Some(reference) = reference {
        reference.check_len(pred.len())?;
        let (_, aligned) = align(pred, reference)?;
        report.segment_f1 = Some(segment_f1(&aligned, reference)?);
        report.boundary_f1 = Some(boundary_f1(&aligned, reference, 1)?);
        report.nmi = Some(nmi(&aligned, reference)?);
        report.temporal_purity = Some(temporal_purity(&aligned, reference)?);
    }
    Ok(report)
}

/// Unweighted per-field means over conversations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeans {
    pub n_conversations: usize,
    #[serde(flatten)]
    pub means: BTreeMap<String, f64>,
}

/// Field-wise arithmetic mean; reference-dependent fields are averaged over the reports that
/// carry them.
pub fn corpus_means(reports: &[MetricReport]) -> CorpusMeans {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in reports {
        for (name, v) in r.fields() {
            let e = sums.entry(name.to_string()).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    CorpusMeans {
        n_conversations: reports.len(),
        means: sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect(),
    }
}
