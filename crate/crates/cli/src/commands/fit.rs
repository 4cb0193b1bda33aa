use std::io::Write;

use rayon::prelude::*;
use regime_seg::hmm::{fit_em, viterbi, EmConfig};
use regime_seg::io::{write_labels, write_model, ModelFile};
use regime_seg::{sticky, NiwPrior, StickyConfig};

use crate::corpus::{conversation_seed, labels_path, load, model_path, Conversation};
use crate::error::CliError;
use crate::{FitArgs, ModelKind};

struct Fitted {
    file: ModelFile,
    labels: regime_seg::LabelSequence,
    loglik: f64,
    effective_k: usize,
}

fn fit_one(args: &FitArgs, conv: &Conversation, seed: u64) -> Result<Fitted, CliError> {
    let series = &conv.series;
    match args.model {
        ModelKind::Hmm => {
            let k = args.k.ok_or_else(|| CliError::Input("--k is required with --model hmm".into()))?;
            let mut cfg = EmConfig::new(k, seed);
            cfg.n_restarts = args.restarts;
            cfg.max_iters = args.max_iters;
            let fit = fit_em(series, &cfg)?;
            let (labels, _) = viterbi(&fit.model, series)?;
            Ok(Fitted {
                effective_k: labels.num_labels(),
                loglik: fit.loglik,
                labels,
                file: ModelFile::Hmm(fit.model),
            })
        }
        ModelKind::Sticky => {
            let mut cfg = StickyConfig::new(seed);
            cfg.k_max = args.k_max;
            cfg.burn_in = args.burn_in;
            cfg.n_samples = args.samples;
            cfg.thin = args.thin;
            let post = sticky::fit(series, &cfg, &NiwPrior::default())?;
            Ok(Fitted {
                effective_k: post.effective_k,
                loglik: post.loglik,
                labels: post.labels.clone(),
                file: ModelFile::Sticky(post),
            })
        }
    }
}

pub fn run(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load(&args.input, args.scope, None)?;
    let fitted: Vec<Result<Fitted, CliError>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, conv)| fit_one(args, conv, conversation_seed(args.seed.seed, i)))
        .collect();
    std::fs::create_dir_all(&args.out_dir)?;
    writeln!(out, "id,loglik,effective_k")?;
    for (conv, fit) in corpus.iter().zip(fitted) {
        let fit = fit?;
        let id = conv.series.id();
        write_model(&model_path(&args.out_dir, id), &fit.file, args.include_samples)?;
        write_labels(&labels_path(&args.out_dir, id), &fit.labels, None)?;
        writeln!(out, "{id},{},{}", fit.loglik, fit.effective_k)?;
    }
    Ok(())
}
