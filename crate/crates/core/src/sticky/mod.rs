//! Truncated (weak-limit) sticky HDP-HMM with factorized per-modality Gaussian emissions,
//! fitted by blocked Gibbs sampling.
//!
//! Each sweep updates, in order: the state sequence by forward filtering–backward sampling,
//! the auxiliary table and override counts, the global weights `beta`, the transition rows,
//! the per-state per-modality emissions from their NIW posteriors, and the concentration
//! parameters `(alpha, kappa, gamma)`.

pub mod dist;
mod fit;
mod niw;
mod sampler;

pub use fit::{fit, StickyPosterior};
pub use niw::NiwPrior;
pub use sampler::{
    init_sampler, joint_loglik, sample_beta, sample_emissions, sample_hypers,
    sample_state_sequence, sample_tables, sample_transition_rows, transition_counts, ChannelData,
    SamplerState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concentration parameters: `alpha` (transition rows), `kappa` (self-transition bias),
/// `gamma` (global weights).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypers {
    pub alpha: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Hypers {
    /// `kappa / (alpha + kappa)`.
    pub fn rho(&self) -> f64 {
        self.kappa / (self.alpha + self.kappa)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.kappa >= 0.0 && self.gamma > 0.0)
            || !(self.alpha + self.kappa > 0.0)
        {
            return Err(Error::InvalidConfig(format!(
                "hyperparameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Gamma(shape, rate) priors on `alpha + kappa` and `gamma`; Beta(a, b) prior on `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPriors {
    pub conc_shape: f64,
    pub conc_rate: f64,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub rho_a: f64,
    pub rho_b: f64,
}

impl Default for HyperPriors {
    fn default() -> Self {
        HyperPriors {
            conc_shape: 1.0,
            conc_rate: 0.01,
            gamma_shape: 1.0,
            gamma_rate: 0.01,
            rho_a: 10.0,
            rho_b: 1.0,
        }
    }
}

impl HyperPriors {
    /// Hyperparameters at their prior means.
    pub fn mean(&self) -> Hypers {
        let conc = self.conc_shape / self.conc_rate;
        let rho = self.rho_a / (self.rho_a + self.rho_b);
        Hypers {
            alpha: (1.0 - rho) * conc,
            kappa: rho * conc,
            gamma: self.gamma_shape / self.gamma_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickyConfig {
    /// Truncation level.
    pub k_max: usize,
    pub burn_in: usize,
    pub n_samples: usize,
    pub thin: usize,
    pub seed: u64,
    pub sample_hypers: bool,
    /// Used when `sample_hypers` is false; prior means otherwise.
    pub fixed_hypers: Option<Hypers>,
    pub hyper_priors: HyperPriors,
}

impl StickyConfig {
    pub fn new(seed: u64) -> Self {
        StickyConfig {
            k_max: 8,
            burn_in: 500,
            n_samples: 500,
            thin: 1,
            seed,
            sample_hypers: true,
            fixed_hypers: None,
            hyper_priors: HyperPriors::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 2 {
            return Err(Error::InvalidConfig("k_max must be at least 2".into()));
        }
        if self.n_samples == 0 || self.thin == 0 {
            return Err(Error::InvalidConfig("n_samples and thin must be at least 1".into()));
        }
        let p = &self.hyper_priors;
        if [p.conc_shape, p.conc_rate, p.gamma_shape, p.gamma_rate, p.rho_a, p.rho_b]
            .iter()
            .any(|x| !(*x > 0.0) || !x.is_finite())
        {
            return Err(Error::InvalidConfig("all prior parameters must be positive".into()));
        }
        if let Some(h) = &self.fixed_hypers {
            h.validate()?;
        }
        Ok(())
    }

    /// Hyperparameters the sampler starts from.
    pub fn initial_hypers(&self) -> Hypers {
        match (self.sample_hypers, self.fixed_hypers) {
            (false, Some(h)) => h,
            _ => self.hyper_priors.mean(),
        }
    }

    pub fn total_sweeps(&self) -> usize {
        self.burn_in + self.n_samples * self.thin
    }
}
