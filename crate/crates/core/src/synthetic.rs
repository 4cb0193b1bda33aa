//! Synthetic conversations with known regime labels.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::types::{ConversationSeries, LabelSequence, Modality, Observation, VAPoint};

/// Regime means per modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSpec {
    /// `means[regime][channel]` as `[valence, arousal]`, channels in canonical order.
    Explicit(Vec<Vec<[f64; 2]>>),
    /// Regimes spaced evenly on a circle with adjacent means `min_separation` apart.
    /// Each modality's circle is rotated by a different offset.
    Auto { min_separation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub k_true: usize,
    pub t: usize,
    /// Probability of staying in the current regime.
    pub self_transition: f64,
    pub means: MeanSpec,
    /// Per-dimension noise standard deviation (emission covariance is `scale^2 I`).
    pub covariance_scale: f64,
    pub modalities: Vec<Modality>,
    /// Per-channel, per-step probability of emitting from a different regime's distribution.
    pub decoupling: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `k_true` regimes separated by three noise standard deviations.
    pub fn new(k_true: usize, t: usize, self_transition: f64, modalities: Vec<Modality>, seed: u64) -> Self {
        SynthConfig {
            k_true,
            t,
            self_transition,
            means: MeanSpec::Auto { min_separation: 3.0 },
            covariance_scale: 1.0,
            modalities,
            decoupling: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.k_true == 0 {
            return bad("k_true must be at least 1");
        }
        if self.t == 0 {
            return bad("T must be at least 1");
        }
        if !(self.self_transition > 0.0 && self.self_transition <= 1.0) {
            return bad("self_transition must lie in (0, 1]");
        }
        if !(self.covariance_scale >= 0.0) || !self.covariance_scale.is_finite() {
            return bad("covariance_scale must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.decoupling) {
            return bad("decoupling must lie in [0, 1]");
        }
        if self.modalities.is_empty() {
            return bad("at least one modality is required");
        }
        let mut sorted = self.modalities.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.modalities.len() {
            return bad("modalities must be distinct");
        }
        match &self.means {
            MeanSpec::Explicit(m) => {
                if m.len() != self.k_true || m.iter().any(|r| r.len() != self.modalities.len()) {
                    return bad("explicit means must be k_true x modalities");
                }
            }
            MeanSpec::Auto { min_separation } => {
                if !(*min_separation >= 0.0) {
                    return bad("min_separation must be non-negative");
                }
            }
        }
        Ok(())
    }

    fn sorted_modalities(&self) -> Vec<Modality> {
        let mut m = self.modalities.clone();
        m.sort();
        m
    }

    /// Resolved `means[regime][channel]`, channels in canonical order.
    pub fn resolved_means(&self) -> Vec<Vec<[f64; 2]>> {
        let n_channels = self.modalities.len();
        match &self.means {
            MeanSpec::Explicit(m) => m.clone(),
            MeanSpec::Auto { min_separation } => {
                let k = self.k_true;
                if k == 1 {
                    return vec![vec![[0.0, 0.0]; n_channels]];
                }
                // Adjacent points on a circle of radius r are 2 r sin(pi / k) apart.
                let radius = min_separation / (2.0 * (PI / k as f64).sin());
                (0..k)
                    .map(|r| {
                        (0..n_channels)
                            .map(|c| {
                                let angle = 2.0 * PI * r as f64 / k as f64 + c as f64 * PI / (2.0 * k as f64);
                                [radius * angle.cos(), radius * angle.sin()]
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// Draws a raw (unstandardized) series and its ground-truth regime labels.
pub fn generate(cfg: &SynthConfig) -> Result<(ConversationSeries, LabelSequence)> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let k = cfg.k_true;
    let means = cfg.resolved_means();
    let modalities = cfg.sorted_modalities();

    let mut labels = Vec::with_capacity(cfg.t);
    let mut z = rng.random_range(0..k);
    for t in 0..cfg.t {
        if t > 0 && k > 1 && rng.random::<f64>() >= cfg.self_transition {
            // Uniform over the other regimes.
            let other = rng.random_range(0..k - 1);
            z = if other >= z { other + 1 } else { other };
        }
        labels.push(z);
    }

    let mut observations = Vec::with_capacity(cfg.t);
    for &z in &labels {
        let mut channels = BTreeMap::new();
        for (c, &m) in modalities.iter().enumerate() {
            let mut source = z;
            if k > 1 && cfg.decoupling > 0.0 && rng.random::<f64>() < cfg.decoupling {
                let other = rng.random_range(0..k - 1);
                source = if other >= z { other + 1 } else { other };
            }
            let [mv, ma] = means[source][c];
            let nv: f64 = StandardNormal.sample(&mut rng);
            let na: f64 = StandardNormal.sample(&mut rng);
            channels.insert(
                m,
                VAPoint {
                    valence: mv + cfg.covariance_scale * nv,
                    arousal: ma + cfg.covariance_scale * na,
                },
            );
        }
        observations.push(Observation::new(channels)?);
    }
    let series = ConversationSeries::new(format!("synth-{}", cfg.seed), observations)?;
    Ok((series, LabelSequence::new(labels)))
}
