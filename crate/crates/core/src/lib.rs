//! Segmentation of multimodal valence–arousal utterance sequences into persistent
//! latent regimes.
//!
//! Two decoders are provided: a tied-covariance Gaussian HMM fitted by EM ([`hmm`]) and a
//! truncated sticky HDP-HMM with factorized per-modality emissions fitted by blocked Gibbs
//! sampling ([`sticky`]). Decoded label sequences are compared against reference labels
//! after Hungarian alignment ([`alignment`]) with the measures in [`metrics`].

pub mod alignment;
pub mod error;
pub mod gaussian;
pub mod hmm;
pub mod io;
pub mod kmeans;
pub mod logspace;
pub mod metrics;
pub mod rng;
pub mod standardize;
pub mod sticky;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use gaussian::GaussianEmission;
pub use hmm::{EmConfig, HmmModel};
pub use rng::{derived_rng, derived_seed, seeded_rng, SeededRng};
pub use standardize::standardize;
pub use sticky::{NiwPrior, StickyConfig, StickyPosterior};
pub use types::{ConversationSeries, LabelSequence, Modality, Observation, VAPoint};
