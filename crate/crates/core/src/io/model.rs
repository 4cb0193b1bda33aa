use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;
use crate::hmm::HmmModel;
use crate::sticky::{Hypers, SamplerState, StickyPosterior};
use crate::types::{LabelSequence, Modality};

use super::{read_text, write_text};

pub const FORMAT_VERSION: u32 = 1;

/// Anything `write_model` can store.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Hmm(HmmModel),
    Sticky(StickyPosterior),
}

impl ModelFile {
    /// The parameters used for decoding.
    pub fn model(&self) -> &HmmModel {
        match self {
            ModelFile::Hmm(m) => m,
            ModelFile::Sticky(p) => &p.model,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Hmm(_) => "hmm",
            ModelFile::Sticky(_) => "sticky",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EmissionDoc {
    mean: [f64; 2],
    covariance: [[f64; 2]; 2],
}

impl From<&GaussianEmission> for EmissionDoc {
    fn from(g: &GaussianEmission) -> Self {
        let m = g.mean();
        let c = g.covariance();
        EmissionDoc {
            mean: [m[0], m[1]],
            covariance: [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]],
        }
    }
}

impl EmissionDoc {
    fn build(&self) -> Result<GaussianEmission> {
        let c = self.covariance;
        GaussianEmission::new(
            Vector2::new(self.mean[0], self.mean[1]),
            Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1]),
        )
    }
}

fn emissions_doc(e: &[Vec<GaussianEmission>]) -> Vec<Vec<EmissionDoc>> {
    e.iter().map(|s| s.iter().map(EmissionDoc::from).collect()).collect()
}

fn emissions_build(e: &[Vec<EmissionDoc>]) -> Result<Vec<Vec<GaussianEmission>>> {
    e.iter().map(|s| s.iter().map(EmissionDoc::build).collect()).collect()
}

#[derive(Serialize, Deserialize)]
struct HmmDoc {
    modalities: Vec<Modality>,
    initial: Vec<f64>,
    transitions: Vec<Vec<f64>>,
    /// `[state][modality]`.
    emissions: Vec<Vec<EmissionDoc>>,
    tied_covariance: bool,
}

impl From<&HmmModel> for HmmDoc {
    fn from(m: &HmmModel) -> Self {
        HmmDoc {
            modalities: m.modalities().to_vec(),
            initial: m.initial().to_vec(),
            transitions: m.transitions().to_vec(),
            emissions: emissions_doc(m.emissions()),
            tied_covariance: m.tied_covariance(),
        }
    }
}

impl HmmDoc {
    fn build(&self) -> Result<HmmModel> {
        HmmModel::new(
            self.modalities.clone(),
            self.initial.clone(),
            self.transitions.clone(),
            emissions_build(&self.emissions)?,
            self.tied_covariance,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct SampleDoc {
    z: Vec<usize>,
    beta: Vec<f64>,
    pi: Vec<Vec<f64>>,
    initial: Vec<f64>,
    emissions: Vec<Vec<EmissionDoc>>,
    hypers: Hypers,
    tables: Vec<Vec<usize>>,
    overrides: Vec<usize>,
}

impl From<&SamplerState> for SampleDoc {
    fn from(s: &SamplerState) -> Self {
        SampleDoc {
            z: s.z.labels().to_vec(),
            beta: s.beta.clone(),
            pi: s.pi.clone(),
            initial: s.initial.clone(),
            emissions: emissions_doc(&s.emissions),
            hypers: s.hypers,
            tables: s.tables.clone(),
            overrides: s.overrides.clone(),
        }
    }
}

impl SampleDoc {
    fn build(self) -> Result<SamplerState> {
        Ok(SamplerState {
            z: LabelSequence::new(self.z),
            emissions: emissions_build(&self.emissions)?,
            beta: self.beta,
            pi: self.pi,
            initial: self.initial,
            hypers: self.hypers,
            tables: self.tables,
            overrides: self.overrides,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StickyDoc {
    model: HmmDoc,
    mean_beta: Vec<f64>,
    mean_hypers: Hypers,
    state_order: Vec<usize>,
    labels: Vec<usize>,
    effective_k: usize,
    loglik: f64,
    trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<SampleDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Body {
    Hmm(HmmDoc),
    Sticky(Box<StickyDoc>),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    #[serde(flatten)]
    body: Body,
}

/// Self-describing JSON. Retained posterior samples are written only with `include_samples`.
pub fn model_to_string(file: &ModelFile, include_samples: bool) -> Result<String> {
    let body = match file {
        ModelFile::Hmm(m) => Body::Hmm(HmmDoc::from(m)),
        ModelFile::Sticky(p) => Body::Sticky(Box::new(StickyDoc {
            model: HmmDoc::from(&p.model),
            mean_beta: p.mean_beta.clone(),
            mean_hypers: p.mean_hypers,
            state_order: p.state_order.clone(),
            labels: p.labels.labels().to_vec(),
            effective_k: p.effective_k,
            loglik: p.loglik,
            trace: p.trace.clone(),
            samples: include_samples.then(|| p.samples.iter().map(SampleDoc::from).collect()),
        })),
    };
    let doc = Envelope {
        format_version: FORMAT_VERSION,
        body,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn model_from_str(text: &str) -> Result<ModelFile> {
    let value: Value = serde_json::from_str(text)?;
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::ParseError("missing format_version".into()))?;
    if version > FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: FORMAT_VERSION,
        });
    }
    let doc: Envelope = serde_json::from_value(value)?;
    match doc.body {
        Body::Hmm(h) => Ok(ModelFile::Hmm(h.build()?)),
        Body::Sticky(s) => {
            let s = *s;
            Ok(ModelFile::Sticky(StickyPosterior {
                model: s.model.build()?,
                samples: s
                    .samples
                    .unwrap_or_default()
                    .into_iter()
                    .map(SampleDoc::build)
                    .collect::<Result<_>>()?,
                mean_beta: s.mean_beta,
                mean_hypers: s.mean_hypers,
                state_order: s.state_order,
                labels: LabelSequence::new(s.labels),
                effective_k: s.effective_k,
                loglik: s.loglik,
                trace: s.trace,
            }))
        }
    }
}

pub fn write_model(path: &Path, file: &ModelFile, include_samples: bool) -> Result<()> {
    write_text(path, &model_to_string(file, include_samples)?)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    model_from_str(&read_text(path)?)
}
