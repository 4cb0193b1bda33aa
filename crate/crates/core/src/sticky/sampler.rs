//! Gibbs conditionals of the weak-limit sticky HDP-HMM.

use nalgebra::Vector2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;
use crate::hmm::{emission_table_for, forward_log, LogTables};
use crate::kmeans::kmeans;
use crate::logspace::ln_or_neg_inf;
use crate::types::{ConversationSeries, LabelSequence, Modality};

use super::dist::{sample_bernoulli, sample_beta as beta_draw, sample_dirichlet, sample_gamma};
use super::{Hypers, NiwPrior, StickyConfig};

/// Rounds of the auxiliary-variable concentration updates per sweep.
const CONCENTRATION_ROUNDS: usize = 10;

/// Per-modality column view of a series, `channels[c][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    pub modalities: Vec<Modality>,
    pub channels: Vec<Vec<Vector2<f64>>>,
}

impl ChannelData {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<&ConversationSeries> for ChannelData {
    fn from(series: &ConversationSeries) -> Self {
        ChannelData {
            modalities: series.modalities().to_vec(),
            channels: series.channel_vectors(),
        }
    }
}

/// Full state of one Gibbs chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    pub z: LabelSequence,
    /// Global state weights.
    pub beta: Vec<f64>,
    /// Row-stochastic transition matrix.
    pub pi: Vec<Vec<f64>>,
    /// Distribution of the first state (held fixed, uniform by default).
    pub initial: Vec<f64>,
    /// `emissions[state][channel]`.
    pub emissions: Vec<Vec<GaussianEmission>>,
    pub hypers: Hypers,
    /// Auxiliary table counts `m[j][k]`.
    pub tables: Vec<Vec<usize>>,
    /// Sticky override counts `w[j]`.
    pub overrides: Vec<usize>,
}

impl SamplerState {
    pub fn k_max(&self) -> usize {
        self.beta.len()
    }

    pub fn log_tables(&self, data: &ChannelData) -> LogTables {
        LogTables {
            log_initial: self.initial.iter().map(|&p| ln_or_neg_inf(p)).collect(),
            log_transitions: self
                .pi
                .iter()
                .map(|r| r.iter().map(|&p| ln_or_neg_inf(p)).collect())
                .collect(),
            log_emissions: emission_table_for(&self.emissions, &data.channels),
        }
    }

    /// Table counts with sticky overrides removed from the diagonal.
    pub fn corrected_tables(&self) -> Vec<Vec<usize>> {
        let mut m = self.tables.clone();
        for (j, row) in m.iter_mut().enumerate() {
            row[j] -= self.overrides[j].min(row[j]);
        }
        m
    }
}

/// Transition counts `n[j][k]` of a label path over `k` states.
pub fn transition_counts(z: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut n = vec![vec![0usize; k]; k];
    for w in z.windows(2) {
        n[w[0]][w[1]] += 1;
    }
    n
}

/// Initial chain state: k-means labels, uniform `beta`, emissions and rows drawn given those labels.
pub fn init_sampler<R: Rng + ?Sized>(
    series: &ConversationSeries,
    cfg: &StickyConfig,
    prior: &NiwPrior,
    rng: &mut R,
) -> Result<SamplerState> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    cfg.validate()?;
    prior.validate()?;
    let k_max = cfg.k_max;
    let t_len = series.len();
    let clusters = k_max.min(t_len.div_ceil(4)).max(1);
    let (assign, _) = kmeans(&series.stacked(), clusters, 50, rng);
    let data = ChannelData::from(series);
    let mut state = SamplerState {
        z: LabelSequence::new(assign),
        beta: vec![1.0 / k_max as f64; k_max],
        pi: vec![vec![1.0 / k_max as f64; k_max]; k_max],
        initial: vec![1.0 / k_max as f64; k_max],
        emissions: Vec::new(),
        hypers: cfg.initial_hypers(),
        tables: vec![vec![0; k_max]; k_max],
        overrides: vec![0; k_max],
    };
    state.emissions = sample_emissions(&state, &data, prior, rng)?;
    state.pi = sample_transition_rows(&state, rng);
    Ok(state)
}

/// One exact draw of the whole state path by forward filtering–backward sampling.
pub fn sample_state_sequence<R: Rng + ?Sized>(
    state: &SamplerState,
    data: &ChannelData,
    rng: &mut R,
) -> Result<LabelSequence> {
    let tables = state.log_tables(data);
    let (alpha, _) = forward_log(&tables)?;
    let k = state.k_max();
    let t_len = tables.len();
    let mut z = vec![0usize; t_len];
    let mut weights = vec![0.0; k];
    let mut draw = |logw: &[f64], rng: &mut R| -> Result<usize> {
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::NumericalUnderflow("backward sampling weights vanished".into()));
        }
        let mut total = 0.0;
        for (w, l) in weights.iter_mut().zip(logw) {
            *w = (l - max).exp();
            total += *w;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        for (j, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                pick = Some(j);
                if u < w {
                    break;
                }
                u -= w;
            }
        }
        Ok(pick.expect("at least one positive weight"))
    };
    z[t_len - 1] = draw(&alpha[t_len - 1], rng)?;
    let mut logw = vec![0.0; k];
    for t in (0..t_len - 1).rev() {
        let next = z[t + 1];
        for (j, l) in logw.iter_mut().enumerate() {
            *l = alpha[t][j] + tables.log_transitions[j][next];
        }
        z[t] = draw(&logw, rng)?;
    }
    Ok(LabelSequence::new(z))
}

/// Auxiliary table counts `m` and sticky override counts `w` given the current path.
pub fn sample_tables<R: Rng + ?Sized>(
    state: &SamplerState,
    rng: &mut R,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let k = state.k_max();
    let n = transition_counts(state.z.labels(), k);
    let Hypers { alpha, kappa, .. } = state.hypers;
    let mut m = vec![vec![0usize; k]; k];
    for j in 0..k {
        for kk in 0..k {
            let weight = alpha * state.beta[kk] + if j == kk { kappa } else { 0.0 };
            let mut tables = 0;
            for i in 0..n[j][kk] {
                // The first customer always opens a table.
                if i == 0 || sample_bernoulli(weight / (i as f64 + weight), rng) {
                    tables += 1;
                }
            }
            m[j][kk] = tables;
        }
    }
    let rho = state.hypers.rho();
    let w = (0..k)
        .map(|j| {
            let p = rho / (rho + state.beta[j] * (1.0 - rho));
            (0..m[j][j]).filter(|_| sample_bernoulli(p, rng)).count()
        })
        .collect();
    (m, w)
}

/// Global weights from the override-corrected table counts.
pub fn sample_beta<R: Rng + ?Sized>(state: &SamplerState, rng: &mut R) -> Vec<f64> {
    let k = state.k_max();
    let corrected = state.corrected_tables();
    let base = state.hypers.gamma / k as f64;
    let params: Vec<f64> = (0..k)
        .map(|kk| base + corrected.iter().map(|row| row[kk]).sum::<usize>() as f64)
        .collect();
    sample_dirichlet(&params, rng)
}

/// Transition rows: row `j ~ Dirichlet(alpha beta + kappa e_j + n_j)`.
pub fn sample_transition_rows<R: Rng + ?Sized>(state: &SamplerState, rng: &mut R) -> Vec<Vec<f64>> {
    let k = state.k_max();
    let n = transition_counts(state.z.labels(), k);
    let Hypers { alpha, kappa, .. } = state.hypers;
    (0..k)
        .map(|j| {
            let params: Vec<f64> = (0..k)
                .map(|kk| {
                    alpha * state.beta[kk] + if j == kk { kappa } else { 0.0 } + n[j][kk] as f64
                })
                .collect();
            sample_dirichlet(&params, rng)
        })
        .collect()
}

/// Per-state, per-modality emissions drawn from their NIW posteriors.
pub fn sample_emissions<R: Rng + ?Sized>(
    state: &SamplerState,
    data: &ChannelData,
    prior: &NiwPrior,
    rng: &mut R,
) -> Result<Vec<Vec<GaussianEmission>>> {
    let k = state.k_max();
    let z = state.z.labels();
    (0..k)
        .map(|kk| {
            data.channels
                .iter()
                .map(|col| {
                    let points: Vec<Vector2<f64>> = col
                        .iter()
                        .zip(z)
                        .filter(|(_, &l)| l == kk)
                        .map(|(x, _)| *x)
                        .collect();
                    prior.posterior(&points).sample(rng)
                })
                .collect()
        })
        .collect()
}

/// Concentration parameters given the table and override counts. Returns the fixed values
/// unchanged when hyperparameter sampling is off.
pub fn sample_hypers<R: Rng + ?Sized>(
    state: &SamplerState,
    cfg: &StickyConfig,
    rng: &mut R,
) -> Hypers {
    if !cfg.sample_hypers {
        return cfg.fixed_hypers.unwrap_or(state.hypers);
    }
    let p = &cfg.hyper_priors;
    let k = state.k_max();
    let n = transition_counts(state.z.labels(), k);
    let row_totals: Vec<f64> = n.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let total_tables: f64 = state.tables.iter().flatten().sum::<usize>() as f64;
    let total_overrides: f64 = state.overrides.iter().sum::<usize>() as f64;
    let corrected = state.corrected_tables();
    let corrected_total: f64 = corrected.iter().flatten().sum::<usize>() as f64;
    let used_dishes = (0..k)
        .filter(|&kk| corrected.iter().any(|row| row[kk] > 0))
        .count() as f64;

    let mut conc = state.hypers.alpha + state.hypers.kappa;
    let mut gamma = state.hypers.gamma;
    for _ in 0..CONCENTRATION_ROUNDS {
        let mut log_r = 0.0;
        let mut s = 0.0;
        for &nj in row_totals.iter().filter(|&&nj| nj > 0.0) {
            log_r += beta_draw(conc + 1.0, nj, rng).ln();
            if sample_bernoulli(nj / (nj + conc), rng) {
                s += 1.0;
            }
        }
        conc = sample_gamma(p.conc_shape + total_tables - s, p.conc_rate - log_r, rng);

        gamma = if corrected_total > 0.0 {
            let eta = beta_draw(gamma + 1.0, corrected_total, rng);
            let rate = p.gamma_rate - eta.ln();
            let odds = (p.gamma_shape + used_dishes - 1.0) / (corrected_total * rate);
            let shape = if sample_bernoulli(odds / (1.0 + odds), rng) {
                p.gamma_shape + used_dishes
            } else {
                p.gamma_shape + used_dishes - 1.0
            };
            sample_gamma(shape, rate, rng)
        } else {
            sample_gamma(p.gamma_shape, p.gamma_rate, rng)
        };
    }
    let rho = beta_draw(
        p.rho_a + total_overrides,
        p.rho_b + total_tables - total_overrides,
        rng,
    );
    Hypers {
        alpha: (1.0 - rho) * conc,
        kappa: rho * conc,
        gamma,
    }
}

/// `log p(X, z | initial, pi, emissions)` for the state's current path.
pub fn joint_loglik(state: &SamplerState, data: &ChannelData) -> f64 {
    let tables = state.log_tables(data);
    crate::hmm::path_log_prob(&tables, state.z.labels())
}
