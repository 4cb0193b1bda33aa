use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::commands::eval::{reports, FIELDS};
use crate::corpus::{emit, load};
use crate::error::CliError;
use crate::{CompareArgs, Format};

/// Whether a larger value of the metric counts as a win. Metrics without a preferred
/// direction (effective regimes, dominant share) count the larger value as the win.
fn higher_wins(metric: &str) -> bool {
    !matches!(
        metric,
        "single_utterance_fraction" | "regime_shifts" | "transition_entropy" | "intra_regime_variance"
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRow {
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean of `a - b` over conversations.
    pub mean_diff: f64,
    pub a_wins: usize,
    pub b_wins: usize,
    pub ties: usize,
}

pub fn run(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load(&args.input, args.scope, args.reference.as_deref())?;
    let ra = reports(&corpus, &args.a)?;
    let rb = reports(&corpus, &args.b)?;
    let mut rows = Vec::new();
    for metric in FIELDS {
        let pairs: Vec<(f64, f64)> = ra
            .iter()
            .zip(&rb)
            .filter_map(|(a, b)| {
                let fa: BTreeMap<_, _> = a.fields().into_iter().collect();
                let fb: BTreeMap<_, _> = b.fields().into_iter().collect();
                Some((*fa.get(metric)?, *fb.get(metric)?))
            })
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let n = pairs.len() as f64;
        let (mut a_wins, mut b_wins, mut ties) = (0, 0, 0);
        for &(a, b) in &pairs {
            let (better, worse) = if higher_wins(metric) { (a, b) } else { (b, a) };
            if a == b {
                ties += 1;
            } else if better > worse {
                a_wins += 1;
            } else {
                b_wins += 1;
            }
        }
        rows.push(PairedRow {
            metric: metric.to_string(),
            mean_a: pairs.iter().map(|p| p.0).sum::<f64>() / n,
            mean_b: pairs.iter().map(|p| p.1).sum::<f64>() / n,
            mean_diff: pairs.iter().map(|p| p.0 - p.1).sum::<f64>() / n,
            a_wins,
            b_wins,
            ties,
        });
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("metric,mean_a,mean_b,mean_diff,a_wins,b_wins,ties\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.metric, r.mean_a, r.mean_b, r.mean_diff, r.a_wins, r.b_wins, r.ties
                ));
            }
            s
        }
    };
    emit(&text, args.out.as_deref(), out)
}
