use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::types::{ConversationSeries, LabelSequence};

use super::HmmModel;

/// Log-domain HMM parameters paired with a log emission table `[t][state]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTables {
    pub log_initial: Vec<f64>,
    pub log_transitions: Vec<Vec<f64>>,
    pub log_emissions: Vec<Vec<f64>>,
}

impl LogTables {
    pub fn n_states(&self) -> usize {
        self.log_initial.len()
    }

    pub fn len(&self) -> usize {
        self.log_emissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_emissions.is_empty()
    }
}

/// Forward messages `log p(x_1..x_t, z_t = k)` and the total log-likelihood.
pub fn forward_log(tables: &LogTables) -> Result<(Vec<Vec<f64>>, f64)> {
    let k = tables.n_states();
    let t_len = tables.len();
    if t_len == 0 {
        return Err(Error::EmptySeries);
    }
    let mut alpha = Vec::with_capacity(t_len);
    alpha.push(
        (0..k)
            .map(|j| tables.log_initial[j] + tables.log_emissions[0][j])
            .collect::<Vec<_>>(),
    );
    let mut buf = vec![0.0; k];
    for t in 1..t_len {
        let prev: &Vec<f64> = &alpha[t - 1];
        let next: Vec<f64> = (0..k)
            .map(|j| {
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = prev[i] + tables.log_transitions[i][j];
                }
                log_sum_exp(&buf) + tables.log_emissions[t][j]
            })
            .collect();
        alpha.push(next);
    }
    let ll = log_sum_exp(&alpha[t_len - 1]);
    if !ll.is_finite() {
        return Err(Error::NumericalUnderflow(format!(
            "forward log-likelihood is {ll}"
        )));
    }
    Ok((alpha, ll))
}

/// Backward messages `log p(x_{t+1}..x_T | z_t = k)`.
pub fn backward_log(tables: &LogTables) -> Vec<Vec<f64>> {
    let k = tables.n_states();
    let t_len = tables.len();
    let mut beta = vec![vec![0.0; k]; t_len];
    let mut buf = vec![0.0; k];
    for t in (0..t_len.saturating_sub(1)).rev() {
        for i in 0..k {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = tables.log_transitions[i][j] + tables.log_emissions[t + 1][j] + beta[t + 1][j];
            }
            beta[t][i] = log_sum_exp(&buf);
        }
    }
    beta
}

/// Most probable state path and its joint log-probability. Ties go to the lower state index.
pub fn viterbi_log(tables: &LogTables) -> Result<(Vec<usize>, f64)> {
    let k = tables.n_states();
    let t_len = tables.len();
    if t_len == 0 {
        return Err(Error::EmptySeries);
    }
    let mut delta: Vec<f64> = (0..k)
        .map(|j| tables.log_initial[j] + tables.log_emissions[0][j])
        .collect();
    let mut back = vec![vec![0usize; k]; t_len];
    for t in 1..t_len {
        let mut next = vec![f64::NEG_INFINITY; k];
        for j in 0..k {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, &d) in delta.iter().enumerate() {
                let s = d + tables.log_transitions[i][j];
                if s > best {
                    best = s;
                    arg = i;
                }
            }
            next[j] = best + tables.log_emissions[t][j];
            back[t][j] = arg;
        }
        delta = next;
    }
    let mut last = 0;
    let mut best = f64::NEG_INFINITY;
    for (j, &d) in delta.iter().enumerate() {
        if d > best {
            best = d;
            last = j;
        }
    }
    if !best.is_finite() {
        return Err(Error::NumericalUnderflow("no path has finite probability".into()));
    }
    let mut path = vec![0; t_len];
    path[t_len - 1] = last;
    for t in (1..t_len).rev() {
        path[t - 1] = back[t][path[t]];
    }
    Ok((path, best))
}

/// Joint log-probability of one explicit path.
pub fn path_log_prob(tables: &LogTables, path: &[usize]) -> f64 {
    let mut lp = tables.log_initial[path[0]] + tables.log_emissions[0][path[0]];
    for t in 1..path.len() {
        lp += tables.log_transitions[path[t - 1]][path[t]] + tables.log_emissions[t][path[t]];
    }
    lp
}

/// `log p(X | model)`, marginalizing over all state paths.
pub fn forward_loglik(model: &HmmModel, series: &ConversationSeries) -> Result<f64> {
    forward_log(&model.log_tables(series)?).map(|(_, ll)| ll)
}

/// Most probable state path under `model` and its joint log-probability.
pub fn viterbi(model: &HmmModel, series: &ConversationSeries) -> Result<(LabelSequence, f64)> {
    let (path, lp) = viterbi_log(&model.log_tables(series)?)?;
    Ok((LabelSequence::new(path), lp))
}
