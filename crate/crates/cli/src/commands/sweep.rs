use std::io::Write;

use rayon::prelude::*;
use regime_seg::hmm::{fit_em_nested, viterbi, EmConfig, HmmModel};
use regime_seg::metrics::{temporal_stats, transition_entropy};
use regime_seg::{derived_seed, ConversationSeries};
use serde::Serialize;

use crate::corpus::{emit, load};
use crate::error::CliError;
use crate::{Format, SweepArgs};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    /// Best log-likelihood of one model shared by all conversations.
    pub loglik: f64,
    /// Means over conversations of the Viterbi decodes.
    pub mean_regime_duration: f64,
    pub transition_entropy: f64,
}

fn decode_stats(model: &HmmModel, series: &[ConversationSeries]) -> Result<(f64, f64), CliError> {
    let per: Vec<(f64, f64)> = series
        .par_iter()
        .map(|s| {
            let (labels, _) = viterbi(model, s)?;
            let duration = temporal_stats(&labels)?.mean_regime_duration;
            let entropy = if labels.len() < 2 { 0.0 } else { transition_entropy(&labels)? };
            Ok((duration, entropy))
        })
        .collect::<Result<_, CliError>>()?;
    let n = per.len() as f64;
    Ok((
        per.iter().map(|p| p.0).sum::<f64>() / n,
        per.iter().map(|p| p.1).sum::<f64>() / n,
    ))
}

/// Fits K = `k_min..=k_max`, each K warm-started from the K - 1 fit as well as from fresh
/// restarts.
pub fn sweep(series: &[ConversationSeries], args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(CliError::Input(format!(
            "invalid K range {}..{}: need 1 <= k-min <= k-max",
            args.k_min, args.k_max
        )));
    }
    let mut rows = Vec::new();
    let mut previous: Option<HmmModel> = None;
    for k in args.k_min..=args.k_max {
        let mut cfg = EmConfig::new(k, derived_seed(args.seed.seed, k as u64));
        cfg.n_restarts = args.restarts;
        cfg.max_iters = args.max_iters;
        let fit = fit_em_nested(series, &cfg, previous.as_ref())?;
        let (mean_regime_duration, transition_entropy) = decode_stats(&fit.model, series)?;
        rows.push(SweepRow {
            k,
            loglik: fit.loglik,
            mean_regime_duration,
            transition_entropy,
        });
        previous = Some(fit.model);
    }
    Ok(rows)
}

pub fn run(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(CliError::Input(format!(
            "invalid K range {}..{}: need 1 <= k-min <= k-max",
            args.k_min, args.k_max
        )));
    }
    let corpus = load(&args.input, args.scope, None)?;
    let series: Vec<ConversationSeries> = corpus.into_iter().map(|c| c.series).collect();
    let rows = sweep(&series, args)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("k,loglik,mean_regime_duration,transition_entropy\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.k, r.loglik, r.mean_regime_duration, r.transition_entropy
                ));
            }
            s
        }
    };
    emit(&text, args.out.as_deref(), out)
}
