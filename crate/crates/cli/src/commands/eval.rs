use std::io::Write;

use rayon::prelude::*;
use regime_seg::metrics::{corpus_means, evaluate, CorpusMeans, MetricReport};
use serde::Serialize;

use crate::corpus::{decoded_labels, emit, load, Conversation};
use crate::error::CliError;
use crate::{EvalArgs, Format};

/// Every report field, in serialization order.
pub const FIELDS: [&str; 12] = [
    "segment_f1",
    "boundary_f1",
    "nmi",
    "mean_regime_duration",
    "single_utterance_fraction",
    "regime_shifts",
    "temporal_purity",
    "transition_entropy",
    "intra_regime_variance",
    "inter_regime_centroid_distance",
    "effective_regimes",
    "dominant_regime_share",
];

#[derive(Serialize)]
struct Row<'a> {
    id: &'a str,
    #[serde(flatten)]
    report: &'a MetricReport,
}

#[derive(Serialize)]
struct Output<'a> {
    conversations: Vec<Row<'a>>,
    corpus: &'a CorpusMeans,
}

/// Evaluates the decodes found in `dir` for every conversation, in corpus order.
pub fn reports(corpus: &[Conversation], dir: &std::path::Path) -> Result<Vec<MetricReport>, CliError> {
    corpus
        .par_iter()
        .map(|c| {
            let pred = decoded_labels(dir, &c.series)?;
            Ok(evaluate(&pred, c.reference.as_ref().map(|r| &r.labels), &c.series)?)
        })
        .collect()
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load(&args.input, args.scope, args.reference.as_deref())?;
    let reports = reports(&corpus, &args.pred)?;
    let means = corpus_means(&reports);
    let text = match args.format {
        Format::Json => {
            let doc = Output {
                conversations: corpus
                    .iter()
                    .zip(&reports)
                    .map(|(c, report)| Row { id: c.series.id(), report })
                    .collect(),
                corpus: &means,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => {
            let mut s = format!("id,{}\n", FIELDS.join(","));
            for (c, r) in corpus.iter().zip(&reports) {
                let fields: std::collections::BTreeMap<_, _> = r.fields().into_iter().collect();
                let cells: Vec<String> = FIELDS.iter().map(|f| csv_cell(fields.get(f).copied())).collect();
                s.push_str(&format!("{},{}\n", c.series.id(), cells.join(",")));
            }
            let cells: Vec<String> = FIELDS.iter().map(|f| csv_cell(means.means.get(*f).copied())).collect();
            s.push_str(&format!("mean,{}\n", cells.join(",")));
            s
        }
    };
    emit(&text, args.out.as_deref(), out)
}
