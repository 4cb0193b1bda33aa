//! Gaussian HMM with factorized per-modality emissions: exact inference and EM fitting.

mod em;
mod inference;

pub use em::{
    fit_em, fit_em_nested, fit_em_pooled, refine_em, refine_em_pooled, split_state, EmConfig, EmFit, EmRun,
};
pub use inference::{
    backward_log, forward_log, forward_loglik, path_log_prob, viterbi, viterbi_log, LogTables,
};

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;
use crate::types::{ConversationSeries, Modality, Observation};

const SIMPLEX_TOL: f64 = 1e-9;

pub(crate) fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidConfig(format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidConfig(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

/// Initial distribution, row-stochastic transitions and per-state, per-modality Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    modalities: Vec<Modality>,
    initial: Vec<f64>,
    transitions: Vec<Vec<f64>>,
    /// `emissions[state][channel]`, channels in `modalities` order.
    emissions: Vec<Vec<GaussianEmission>>,
    tied_covariance: bool,
}

impl HmmModel {
    pub fn new(
        modalities: Vec<Modality>,
        initial: Vec<f64>,
        transitions: Vec<Vec<f64>>,
        emissions: Vec<Vec<GaussianEmission>>,
        tied_covariance: bool,
    ) -> Result<Self> {
        let k = initial.len();
        if k == 0 {
            return Err(Error::InvalidConfig("model needs at least one state".into()));
        }
        if modalities.is_empty() {
            return Err(Error::InvalidConfig("model needs at least one modality".into()));
        }
        let mut sorted = modalities.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != modalities {
            return Err(Error::InvalidConfig(
                "modalities must be distinct and in canonical order".into(),
            ));
        }
        check_simplex(&initial, "initial distribution")?;
        if transitions.len() != k || emissions.len() != k {
            return Err(Error::InvalidConfig(format!(
                "expected {k} transition rows and emission sets"
            )));
        }
        for (j, row) in transitions.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidConfig(format!("transition row {j} has wrong length")));
            }
            check_simplex(row, &format!("transition row {j}"))?;
        }
        for e in &emissions {
            if e.len() != modalities.len() {
                return Err(Error::InvalidConfig(
                    "each state needs one emission per modality".into(),
                ));
            }
        }
        if tied_covariance {
            for c in 0..modalities.len() {
                let shared = emissions[0][c].covariance();
                if emissions.iter().any(|e| e[c].covariance() != shared) {
                    return Err(Error::InvalidConfig(
                        "tied model has differing covariances".into(),
                    ));
                }
            }
        }
        Ok(HmmModel {
            modalities,
            initial,
            transitions,
            emissions,
            tied_covariance,
        })
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn emissions(&self) -> &[Vec<GaussianEmission>] {
        &self.emissions
    }

    pub fn emission(&self, state: usize, modality: Modality) -> Option<&GaussianEmission> {
        let c = self.modalities.iter().position(|&m| m == modality)?;
        self.emissions.get(state).map(|e| &e[c])
    }

    pub fn tied_covariance(&self) -> bool {
        self.tied_covariance
    }

    /// Mean valence and arousal of `state`, averaged over modalities.
    pub fn mean_va(&self, state: usize) -> (f64, f64) {
        let e = &self.emissions[state];
        let n = e.len() as f64;
        let v = e.iter().map(|g| g.mean()[0]).sum::<f64>() / n;
        let a = e.iter().map(|g| g.mean()[1]).sum::<f64>() / n;
        (v, a)
    }

    fn check_channels(&self, found: &[Modality]) -> Result<()> {
        if found != self.modalities.as_slice() {
            return Err(Error::ChannelMismatch {
                expected: self.modalities.clone(),
                found: found.to_vec(),
            });
        }
        Ok(())
    }

    /// `sum_m log N(x^(m); mu_state^(m), Sigma_state^(m))`.
    pub fn emission_loglik(&self, obs: &Observation, state: usize) -> Result<f64> {
        self.check_channels(&obs.modalities())?;
        if state >= self.n_states() {
            return Err(Error::InvalidConfig(format!("state {state} out of range")));
        }
        Ok(self
            .modalities
            .iter()
            .zip(&self.emissions[state])
            .map(|(&m, g)| g.log_pdf(&obs.get(m).expect("checked").to_vector()))
            .sum())
    }

    /// Log emission table `[t][state]` for a whole series.
    pub fn emission_table(&self, series: &ConversationSeries) -> Result<Vec<Vec<f64>>> {
        self.check_channels(series.modalities())?;
        Ok(emission_table_for(&self.emissions, &series.channel_vectors()))
    }

    pub fn log_tables(&self, series: &ConversationSeries) -> Result<LogTables> {
        Ok(LogTables {
            log_initial: self.initial.iter().map(|&p| crate::logspace::ln_or_neg_inf(p)).collect(),
            log_transitions: self
                .transitions
                .iter()
                .map(|r| r.iter().map(|&p| crate::logspace::ln_or_neg_inf(p)).collect())
                .collect(),
            log_emissions: self.emission_table(series)?,
        })
    }

    /// Reorders states: new state `i` is old state `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let k = self.n_states();
        let mut check = order.to_vec();
        check.sort_unstable();
        if check != (0..k).collect::<Vec<_>>() {
            return Err(Error::InvalidConfig("not a permutation of the states".into()));
        }
        HmmModel::new(
            self.modalities.clone(),
            order.iter().map(|&o| self.initial[o]).collect(),
            order
                .iter()
                .map(|&i| order.iter().map(|&j| self.transitions[i][j]).collect())
                .collect(),
            order.iter().map(|&o| self.emissions[o].clone()).collect(),
            self.tied_covariance,
        )
    }
}

/// Log emission table for per-state, per-channel Gaussians over `channels[c][t]`.
pub fn emission_table_for(
    emissions: &[Vec<GaussianEmission>],
    channels: &[Vec<Vector2<f64>>],
) -> Vec<Vec<f64>> {
    let t_len = channels.first().map_or(0, Vec::len);
    (0..t_len)
        .map(|t| {
            emissions
                .iter()
                .map(|state| {
                    state
                        .iter()
                        .zip(channels)
                        .map(|(g, col)| g.log_pdf(&col[t]))
                        .sum()
                })
                .collect()
        })
        .collect()
}
