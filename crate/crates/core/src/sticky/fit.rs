use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;
use crate::hmm::{forward_loglik, viterbi, HmmModel};
use crate::rng::seeded_rng;
use crate::types::{ConversationSeries, LabelSequence, Modality};

use super::sampler::{
    init_sampler, joint_loglik, sample_beta, sample_emissions, sample_hypers,
    sample_state_sequence, sample_tables, sample_transition_rows, ChannelData, SamplerState,
};
use super::{Hypers, NiwPrior, StickyConfig};

/// Output of a sticky HDP-HMM fit.
///
/// `model` holds the posterior-mean parameters with states reordered so that states used by
/// the reported path come first, in ascending order of mean valence (averaged over
/// modalities); unused states follow, also by valence. Retained `samples` keep the sampler's
/// own indexing: reported state `i` is sampler state `state_order[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickyPosterior {
    pub samples: Vec<SamplerState>,
    pub model: HmmModel,
    /// Posterior-mean global weights, in reported order.
    pub mean_beta: Vec<f64>,
    pub mean_hypers: Hypers,
    pub state_order: Vec<usize>,
    /// Viterbi path under `model`.
    pub labels: LabelSequence,
    pub effective_k: usize,
    /// `log p(X | model)` under the posterior-mean parameters.
    pub loglik: f64,
    /// Joint log-likelihood `log p(X, z | params)` after every sweep, burn-in included.
    pub trace: Vec<f64>,
}

/// Averages retained samples into one HMM in sampler indexing.
fn average(samples: &[SamplerState], modalities: Vec<Modality>) -> Result<(HmmModel, Vec<f64>, Hypers)> {
    let n = samples.len() as f64;
    let first = &samples[0];
    let k = first.k_max();
    let n_channels = first.emissions[0].len();
    let mut pi = vec![vec![0.0; k]; k];
    let mut beta = vec![0.0; k];
    let mut means = vec![vec![Vector2::zeros(); n_channels]; k];
    let mut covs = vec![vec![Matrix2::zeros(); n_channels]; k];
    let mut hypers = Hypers {
        alpha: 0.0,
        kappa: 0.0,
        gamma: 0.0,
    };
    for s in samples {
        for j in 0..k {
            beta[j] += s.beta[j] / n;
            for kk in 0..k {
                pi[j][kk] += s.pi[j][kk] / n;
            }
            for c in 0..n_channels {
                means[j][c] += s.emissions[j][c].mean() / n;
                covs[j][c] += s.emissions[j][c].covariance() / n;
            }
        }
        hypers.alpha += s.hypers.alpha / n;
        hypers.kappa += s.hypers.kappa / n;
        hypers.gamma += s.hypers.gamma / n;
    }
    let renorm = |v: &mut Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
    };
    pi.iter_mut().for_each(renorm);
    renorm(&mut beta);
    let emissions = means
        .into_iter()
        .zip(covs)
        .map(|(ms, cs)| {
            ms.into_iter()
                .zip(cs)
                .map(|(m, c)| GaussianEmission::new(m, c))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let model = HmmModel::new(modalities, first.initial.clone(), pi, emissions, false)?;
    Ok((model, beta, hypers))
}

/// Runs the blocked Gibbs sampler and reports the Viterbi path under posterior-mean parameters.
pub fn fit(series: &ConversationSeries, cfg: &StickyConfig, prior: &NiwPrior) -> Result<StickyPosterior> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    cfg.validate()?;
    prior.validate()?;
    let data = ChannelData::from(series);
    let mut rng = seeded_rng(cfg.seed);
    let mut state = init_sampler(series, cfg, prior, &mut rng)?;
    let mut trace = Vec::with_capacity(cfg.total_sweeps());
    let mut samples = Vec::with_capacity(cfg.n_samples);
    for sweep in 0..cfg.total_sweeps() {
        state.z = sample_state_sequence(&state, &data, &mut rng)?;
        let (tables, overrides) = sample_tables(&state, &mut rng);
        state.tables = tables;
        state.overrides = overrides;
        state.beta = sample_beta(&state, &mut rng);
        state.pi = sample_transition_rows(&state, &mut rng);
        state.emissions = sample_emissions(&state, &data, prior, &mut rng)?;
        state.hypers = sample_hypers(&state, cfg, &mut rng);
        trace.push(joint_loglik(&state, &data));
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in + 1) % cfg.thin == 0 {
            samples.push(state.clone());
        }
    }

    let (raw, beta, mean_hypers) = average(&samples, series.modalities().to_vec())?;
    let (raw_path, _) = viterbi(&raw, series)?;
    let k = raw.n_states();
    let mut used = vec![false; k];
    raw_path.labels().iter().for_each(|&l| used[l] = true);
    let mut state_order: Vec<usize> = (0..k).collect();
    state_order.sort_by(|&a, &b| {
        used[b]
            .cmp(&used[a])
            .then(raw.mean_va(a).0.total_cmp(&raw.mean_va(b).0))
            .then(a.cmp(&b))
    });
    let model = raw.permuted(&state_order)?;
    let (labels, _) = viterbi(&model, series)?;
    let effective_k = labels.num_labels();
    let loglik = forward_loglik(&model, series)?;
    Ok(StickyPosterior {
        samples,
        mean_beta: state_order.iter().map(|&o| beta[o]).collect(),
        mean_hypers,
        model,
        state_order,
        labels,
        effective_k,
        loglik,
        trace,
    })
}
