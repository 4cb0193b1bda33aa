//! Baum–Welch for the tied-covariance Gaussian HMM.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmission;
use crate::kmeans::kmeans_pp_seeds;
use crate::logspace::ln_or_neg_inf;
use crate::rng::{derived_rng, SeededRng};
use crate::types::{ConversationSeries, Modality};

use super::inference::{backward_log, forward_log, LogTables};
use super::HmmModel;

/// Self-transition mass of the initial transition matrix.
const INIT_SELF_MASS: f64 = 0.8;
/// Responsibility mass below which a state counts as collapsed.
const COLLAPSE_MASS: f64 = 1e-8;
/// Re-seeds allowed per state before a collapse is reported.
const MAX_RESEEDS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once the relative log-likelihood improvement falls below this.
    pub tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
}

impl EmConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        EmConfig {
            k,
            max_iters: 200,
            tol: 1e-6,
            n_restarts: 5,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidConfig("n_restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One EM run from one initialization.
#[derive(Debug, Clone)]
pub struct EmRun {
    pub model: HmmModel,
    pub loglik: f64,
    /// Log-likelihood at each E-step, in order.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Best-of-restarts EM result.
#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: HmmModel,
    pub loglik: f64,
    /// One entry per restart; `None` when that restart failed.
    pub runs: Vec<Option<EmRun>>,
}

/// Sufficient statistics accumulated over one or more sequences.
struct Stats {
    loglik: f64,
    initial: Vec<f64>,
    trans: Vec<Vec<f64>>,
    /// Responsibility mass per state.
    mass: Vec<f64>,
    /// `resp[s][t][k]` per sequence.
    resp: Vec<Vec<Vec<f64>>>,
}

fn e_step(model: &HmmModel, data: &[Vec<Vec<Vector2<f64>>>]) -> Result<Stats> {
    let k = model.n_states();
    let log_initial: Vec<f64> = model.initial().iter().map(|&p| ln_or_neg_inf(p)).collect();
    let log_transitions: Vec<Vec<f64>> = model
        .transitions()
        .iter()
        .map(|r| r.iter().map(|&p| ln_or_neg_inf(p)).collect())
        .collect();
    let mut stats = Stats {
        loglik: 0.0,
        initial: vec![0.0; k],
        trans: vec![vec![0.0; k]; k],
        mass: vec![0.0; k],
        resp: Vec::with_capacity(data.len()),
    };
    for channels in data {
        let tables = LogTables {
            log_initial: log_initial.clone(),
            log_transitions: log_transitions.clone(),
            log_emissions: super::emission_table_for(model.emissions(), channels),
        };
        let (alpha, ll) = forward_log(&tables)?;
        let beta = backward_log(&tables);
        stats.loglik += ll;
        let t_len = tables.len();
        let mut resp = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let g: Vec<f64> = (0..k).map(|j| (alpha[t][j] + beta[t][j] - ll).exp()).collect();
            for (m, x) in stats.mass.iter_mut().zip(&g) {
                *m += x;
            }
            resp.push(g);
        }
        for (s, g) in stats.initial.iter_mut().zip(&resp[0]) {
            *s += g;
        }
        for t in 0..t_len.saturating_sub(1) {
            for i in 0..k {
                if alpha[t][i] == f64::NEG_INFINITY {
                    continue;
                }
                for j in 0..k {
                    let lx = alpha[t][i]
                        + tables.log_transitions[i][j]
                        + tables.log_emissions[t + 1][j]
                        + beta[t + 1][j]
                        - ll;
                    stats.trans[i][j] += lx.exp();
                }
            }
        }
        stats.resp.push(resp);
    }
    Ok(stats)
}

fn m_step(
    model: &HmmModel,
    stats: &Stats,
    data: &[Vec<Vec<Vector2<f64>>>],
    reseed: &[Option<Vec<Vector2<f64>>>],
) -> Result<HmmModel> {
    let k = model.n_states();
    let n_seq = data.len() as f64;
    let initial: Vec<f64> = stats.initial.iter().map(|x| x / n_seq).collect();
    let initial = normalize(&initial).unwrap_or_else(|| model.initial().to_vec());
    let transitions: Vec<Vec<f64>> = stats
        .trans
        .iter()
        .zip(model.transitions())
        .map(|(row, old)| normalize(row).unwrap_or_else(|| old.clone()))
        .collect();

    let n_channels = model.modalities().len();
    let total: f64 = stats.mass.iter().sum();
    let mut means = vec![vec![Vector2::zeros(); n_channels]; k];
    for (c, _) in model.modalities().iter().enumerate() {
        for (state, mean) in means.iter_mut().enumerate() {
            if let Some(seed) = &reseed[state] {
                mean[c] = seed[c];
                continue;
            }
            let mut acc = Vector2::zeros();
            for (channels, resp) in data.iter().zip(&stats.resp) {
                for (x, g) in channels[c].iter().zip(resp) {
                    acc += x * g[state];
                }
            }
            mean[c] = acc / stats.mass[state];
        }
    }
    let mut covs = Vec::with_capacity(n_channels);
    for c in 0..n_channels {
        let mut acc = Matrix2::zeros();
        for (channels, resp) in data.iter().zip(&stats.resp) {
            for (x, g) in channels[c].iter().zip(resp) {
                for (state, mean) in means.iter().enumerate() {
                    let d = x - mean[c];
                    acc += d * d.transpose() * g[state];
                }
            }
        }
        covs.push(acc / total);
    }
    let emissions = means
        .into_iter()
        .map(|mean| {
            mean.into_iter()
                .zip(&covs)
                .map(|(mu, cov)| GaussianEmission::with_jitter(mu, *cov))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    HmmModel::new(
        model.modalities().to_vec(),
        initial,
        transitions,
        emissions,
        true,
    )
}

fn normalize(row: &[f64]) -> Option<Vec<f64>> {
    let s: f64 = row.iter().sum();
    if s > 0.0 && s.is_finite() {
        Some(row.iter().map(|x| x / s).collect())
    } else {
        None
    }
}

/// The observation worst explained by the current model: lowest best-state emission log-likelihood.
fn worst_explained(model: &HmmModel, data: &[Vec<Vec<Vector2<f64>>>]) -> Vec<Vector2<f64>> {
    let mut worst = f64::INFINITY;
    let mut pick = (0, 0);
    for (s, channels) in data.iter().enumerate() {
        let table = super::emission_table_for(model.emissions(), channels);
        for (t, row) in table.iter().enumerate() {
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if best < worst {
                worst = best;
                pick = (s, t);
            }
        }
    }
    data[pick.0].iter().map(|col| col[pick.1]).collect()
}

/// Per-modality population covariance of the pooled data.
fn pooled_covariances(data: &[Vec<Vec<Vector2<f64>>>], n_channels: usize) -> Vec<Matrix2<f64>> {
    (0..n_channels)
        .map(|c| {
            let points: Vec<&Vector2<f64>> = data.iter().flat_map(|ch| ch[c].iter()).collect();
            let n = points.len() as f64;
            let mean = points.iter().fold(Vector2::zeros(), |a, x| a + *x) / n;
            points
                .iter()
                .fold(Matrix2::zeros(), |a, x| a + (*x - mean) * (*x - mean).transpose())
                / n
        })
        .collect()
}

fn initial_model(
    modalities: &[Modality],
    data: &[Vec<Vec<Vector2<f64>>>],
    k: usize,
    rng: &mut SeededRng,
) -> Result<HmmModel> {
    let n_channels = modalities.len();
    let stacked: Vec<Vec<f64>> = data
        .iter()
        .flat_map(|channels| {
            (0..channels[0].len()).map(move |t| {
                channels.iter().flat_map(|col| [col[t][0], col[t][1]]).collect()
            })
        })
        .collect();
    let seeds = kmeans_pp_seeds(&stacked, k, rng);
    let covs = pooled_covariances(data, n_channels);
    let emissions = seeds
        .iter()
        .map(|s| {
            (0..n_channels)
                .map(|c| GaussianEmission::with_jitter(Vector2::new(s[2 * c], s[2 * c + 1]), covs[c]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let off = (1.0 - INIT_SELF_MASS) / k as f64;
    let transitions = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { INIT_SELF_MASS + off } else { off })
                .collect::<Vec<f64>>()
        })
        .map(|r| normalize(&r).expect("positive row"))
        .collect();
    HmmModel::new(
        modalities.to_vec(),
        vec![1.0 / k as f64; k],
        transitions,
        emissions,
        true,
    )
}

fn run_em(
    mut model: HmmModel,
    data: &[Vec<Vec<Vector2<f64>>>],
    max_iters: usize,
    tol: f64,
) -> Result<EmRun> {
    let k = model.n_states();
    let mut reseeds = vec![0usize; k];
    let mut trace = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    for _ in 0..max_iters {
        let stats = e_step(&model, data)?;
        trace.push(stats.loglik);
        if trace.len() > 1 && stats.loglik - prev <= tol * prev.abs() {
            converged = true;
            break;
        }
        prev = stats.loglik;
        let mut reseed = vec![None; k];
        for state in 0..k {
            if stats.mass[state] < COLLAPSE_MASS {
                if reseeds[state] >= MAX_RESEEDS {
                    return Err(Error::EmptyStateCollapse { state });
                }
                reseeds[state] += 1;
                reseed[state] = Some(worst_explained(&model, data));
            }
        }
        model = m_step(&model, &stats, data, &reseed)?;
    }
    if !converged {
        let stats = e_step(&model, data)?;
        trace.push(stats.loglik);
    }
    let loglik = *trace.last().expect("at least one E-step");
    Ok(EmRun {
        model,
        loglik,
        trace,
        converged,
    })
}

fn prepare(series: &[&ConversationSeries]) -> Result<(Vec<Modality>, Vec<Vec<Vec<Vector2<f64>>>>)> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let modalities = first.modalities().to_vec();
    let mut data = Vec::with_capacity(series.len());
    for s in series {
        if s.modalities() != modalities.as_slice() {
            return Err(Error::ChannelMismatch {
                expected: modalities.clone(),
                found: s.modalities().to_vec(),
            });
        }
        if s.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "series {} has T = {} < 2",
                s.id(),
                s.len()
            )));
        }
        data.push(s.channel_vectors());
    }
    Ok((modalities, data))
}

fn best_of_restarts(series: &[&ConversationSeries], cfg: &EmConfig) -> Result<EmFit> {
    cfg.validate()?;
    let (modalities, data) = prepare(series)?;
    let mut runs = Vec::with_capacity(cfg.n_restarts);
    let mut last_err = None;
    for r in 0..cfg.n_restarts {
        let mut rng = derived_rng(cfg.seed, r as u64);
        let run = initial_model(&modalities, &data, cfg.k, &mut rng)
            .and_then(|init| run_em(init, &data, cfg.max_iters, cfg.tol));
        match run {
            Ok(run) => runs.push(Some(run)),
            Err(e) => {
                last_err = Some(e);
                runs.push(None);
            }
        }
    }
    let best = runs
        .iter()
        .flatten()
        .fold(None::<&EmRun>, |best, run| match best {
            Some(b) if b.loglik >= run.loglik => Some(b),
            _ => Some(run),
        })
        .cloned();
    match best {
        Some(best) => Ok(EmFit {
            model: best.model,
            loglik: best.loglik,
            runs,
        }),
        None => Err(last_err.expect("every restart failed")),
    }
}

/// Fits a tied-covariance HMM to one series; best of `n_restarts` k-means++ initializations.
pub fn fit_em(series: &ConversationSeries, cfg: &EmConfig) -> Result<EmFit> {
    best_of_restarts(&[series], cfg)
}

/// Fits one shared model to several series, each starting from the initial distribution.
pub fn fit_em_pooled(series: &[ConversationSeries], cfg: &EmConfig) -> Result<EmFit> {
    let refs: Vec<&ConversationSeries> = series.iter().collect();
    best_of_restarts(&refs, cfg)
}

/// Runs EM from an explicit starting model. The result is tied after the first M-step.
pub fn refine_em(series: &ConversationSeries, init: HmmModel, max_iters: usize, tol: f64) -> Result<EmRun> {
    refine_em_pooled(std::slice::from_ref(series), init, max_iters, tol)
}

pub fn refine_em_pooled(series: &[ConversationSeries], init: HmmModel, max_iters: usize, tol: f64) -> Result<EmRun> {
    let refs: Vec<&ConversationSeries> = series.iter().collect();
    let (modalities, data) = prepare(&refs)?;
    if init.modalities() != modalities.as_slice() {
        return Err(Error::ChannelMismatch {
            expected: init.modalities().to_vec(),
            found: modalities,
        });
    }
    run_em(init, &data, max_iters, tol)
}

/// Best-of-restarts fit that also tries every one-state split of `smaller`, a fitted model
/// with one state fewer. The exact split reproduces `smaller`'s likelihood and EM never
/// decreases it, so the result is at least as likely as `smaller`.
pub fn fit_em_nested(series: &[ConversationSeries], cfg: &EmConfig, smaller: Option<&HmmModel>) -> Result<EmFit> {
    let cold = fit_em_pooled(series, cfg);
    let Some(smaller) = smaller else {
        return cold;
    };
    if smaller.n_states() + 1 != cfg.k {
        return Err(Error::InvalidConfig(format!(
            "warm start needs {} states, got {}",
            cfg.k - 1,
            smaller.n_states()
        )));
    }
    let mut runs = match &cold {
        Ok(fit) => fit.runs.clone(),
        Err(_) => Vec::new(),
    };
    for state in 0..smaller.n_states() {
        for offset in [0.0, 0.5, -0.5] {
            let run = split_state(smaller, state, offset)
                .and_then(|init| refine_em_pooled(series, init, cfg.max_iters, cfg.tol));
            runs.push(run.ok());
        }
    }
    let best = runs
        .iter()
        .flatten()
        .fold(None::<&EmRun>, |best, run| match best {
            Some(b) if b.loglik >= run.loglik => Some(b),
            _ => Some(run),
        })
        .cloned();
    match best {
        Some(b) => Ok(EmFit {
            model: b.model,
            loglik: b.loglik,
            runs,
        }),
        None => cold,
    }
}

/// Adds a copy of `state` as a new last state, sharing its incoming transition mass and
/// initial probability equally. With `offset = 0` the grown model assigns every sequence the
/// same likelihood as `model`; a non-zero offset moves the copy's means by `offset` standard
/// deviations along valence so EM can separate the two.
pub fn split_state(model: &HmmModel, state: usize, offset: f64) -> Result<HmmModel> {
    let k = model.n_states();
    if state >= k {
        return Err(Error::InvalidConfig(format!("state {state} out of range")));
    }
    let mut initial = model.initial().to_vec();
    initial[state] /= 2.0;
    initial.push(initial[state]);
    let mut transitions: Vec<Vec<f64>> = model
        .transitions()
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r[state] /= 2.0;
            r.push(r[state]);
            r
        })
        .collect();
    transitions.push(transitions[state].clone());
    let mut emissions = model.emissions().to_vec();
    let copy = emissions[state]
        .iter()
        .map(|g| {
            let sd = g.covariance()[(0, 0)].sqrt();
            GaussianEmission::new(g.mean() + Vector2::new(offset * sd, 0.0), *g.covariance())
        })
        .collect::<Result<Vec<_>>>()?;
    emissions.push(copy);
    HmmModel::new(
        model.modalities().to_vec(),
        initial,
        transitions,
        emissions,
        model.tied_covariance(),
    )
}
