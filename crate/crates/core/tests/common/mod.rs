//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use regime_seg::{ConversationSeries, GaussianEmission, HmmModel, Modality, Observation, VAPoint};

/// Bivariate normal log-density written out from the closed form.
pub fn normal_logpdf(x: [f64; 2], mean: [f64; 2], cov: [[f64; 2]; 2]) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let dx = [x[0] - mean[0], x[1] - mean[1]];
    let q = (cov[1][1] * dx[0] * dx[0] - (cov[0][1] + cov[1][0]) * dx[0] * dx[1] + cov[0][0] * dx[1] * dx[1]) / det;
    -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * q
}

fn emission_logpdf(model: &HmmModel, state: usize, obs: &Observation) -> f64 {
    model
        .modalities()
        .iter()
        .zip(&model.emissions()[state])
        .map(|(&m, g)| {
            let p = obs.get(m).unwrap();
            let mu = g.mean();
            let c = g.covariance();
            normal_logpdf(
                [p.valence, p.arousal],
                [mu[0], mu[1]],
                [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]],
            )
        })
        .sum()
}

/// Joint log-probability of `path` and the observations, by direct multiplication.
pub fn brute_path_logprob(model: &HmmModel, series: &ConversationSeries, path: &[usize]) -> f64 {
    let obs = series.observations();
    let mut lp = model.initial()[path[0]].ln() + emission_logpdf(model, path[0], &obs[0]);
    for t in 1..path.len() {
        lp += model.transitions()[path[t - 1]][path[t]].ln() + emission_logpdf(model, path[t], &obs[t]);
    }
    lp
}

/// Every length-`t` path over `k` states, in lexicographic order.
pub fn all_paths(k: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

/// `(log p(X), argmax path, its log-probability)` by enumerating all paths.
pub fn brute_force(model: &HmmModel, series: &ConversationSeries) -> (f64, Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut lps = Vec::new();
    for p in all_paths(model.n_states(), series.len()) {
        let lp = brute_path_logprob(model, series, &p);
        if lp > best.1 {
            best = (p, lp);
        }
        lps.push(lp);
    }
    let max = lps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ll = max + lps.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    (ll, best.0, best.1)
}

pub fn random_simplex<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_emission<R: Rng>(rng: &mut R) -> GaussianEmission {
    let a = rng.random_range(0.3..2.0);
    let b = rng.random_range(0.3..2.0);
    let c = rng.random_range(-0.5..0.5) * (a * b as f64).sqrt();
    GaussianEmission::new(
        Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        Matrix2::new(a, c, c, b),
    )
    .unwrap()
}

pub fn random_modalities<R: Rng>(rng: &mut R) -> Vec<Modality> {
    loop {
        let m: Vec<Modality> = Modality::ALL.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if !m.is_empty() {
            return m;
        }
    }
}

pub fn random_model<R: Rng>(k: usize, modalities: &[Modality], rng: &mut R) -> HmmModel {
    HmmModel::new(
        modalities.to_vec(),
        random_simplex(k, rng),
        (0..k).map(|_| random_simplex(k, rng)).collect(),
        (0..k)
            .map(|_| modalities.iter().map(|_| random_emission(rng)).collect())
            .collect(),
        false,
    )
    .unwrap()
}

pub fn random_series<R: Rng>(t: usize, modalities: &[Modality], rng: &mut R) -> ConversationSeries {
    let obs = (0..t)
        .map(|_| {
            let channels: BTreeMap<Modality, VAPoint> = modalities
                .iter()
                .map(|&m| {
                    (
                        m,
                        VAPoint {
                            valence: rng.random_range(-3.0..3.0),
                            arousal: rng.random_range(-3.0..3.0),
                        },
                    )
                })
                .collect();
            Observation::new(channels).unwrap()
        })
        .collect();
    ConversationSeries::new("random", obs).unwrap().assume_standardized()
}

/// Series from `(valence, arousal)` points on the text channel.
pub fn text_series(points: &[(f64, f64)]) -> ConversationSeries {
    let obs = points
        .iter()
        .map(|&(v, a)| Observation::from_pairs([(Modality::Text, VAPoint { valence: v, arousal: a })]).unwrap())
        .collect();
    ConversationSeries::new("text", obs).unwrap().assume_standardized()
}

/// Unsigned Stirling numbers of the first kind, `s[n][m]`.
pub fn stirling_first(n_max: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n_max + 1]; n_max + 1];
    s[0][0] = 1.0;
    for n in 1..=n_max {
        for m in 1..=n {
            s[n][m] = s[n - 1][m - 1] + (n - 1) as f64 * s[n - 1][m];
        }
    }
    s
}
