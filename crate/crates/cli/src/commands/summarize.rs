use std::fmt;
use std::io::Write;

use regime_seg::hmm::{viterbi, HmmModel};
use regime_seg::io::{read_labels, read_model};
use regime_seg::LabelSequence;

use crate::corpus::{emit, load};
use crate::error::CliError;
use crate::SummarizeArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    HistoryTaking,
    AssessmentManagement,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::HistoryTaking => "history-taking",
            Phase::AssessmentManagement => "assessment/management",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSummary {
    pub phase: Phase,
    /// Rank of the regime by mean valence, lowest first.
    pub regime: usize,
    pub valence: f64,
    pub arousal: f64,
    /// Consecutive turns ending at the query that share its regime.
    pub persistence: usize,
    pub shifts_so_far: usize,
}

impl RegimeSummary {
    pub fn stable(&self) -> bool {
        self.persistence > 5
    }

    /// Summary at turn `query` of a decode under `model`.
    pub fn at(model: &HmmModel, labels: &LabelSequence, query: usize) -> Result<Self, CliError> {
        let t = labels.len();
        if query >= t {
            return Err(CliError::Input(format!("query turn {query} is outside 0..{t}")));
        }
        let l = labels.labels();
        let state = l[query];
        if state >= model.n_states() {
            return Err(CliError::Input(format!(
                "label {state} has no state in a {}-state model",
                model.n_states()
            )));
        }
        let mut by_valence: Vec<usize> = (0..model.n_states()).collect();
        by_valence.sort_by(|&a, &b| model.mean_va(a).0.total_cmp(&model.mean_va(b).0).then(a.cmp(&b)));
        let regime = by_valence.iter().position(|&s| s == state).expect("state listed");
        let persistence = l[..=query].iter().rev().take_while(|&&x| x == state).count();
        let shifts_so_far = l[..=query].windows(2).filter(|w| w[0] != w[1]).count();
        let (valence, arousal) = model.mean_va(state);
        Ok(RegimeSummary {
            phase: if 10 * query < 6 * t {
                Phase::HistoryTaking
            } else {
                Phase::AssessmentManagement
            },
            regime,
            valence,
            arousal,
            persistence,
            shifts_so_far,
        })
    }
}

fn two_decimals(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// The five-line summary block, newline-terminated.
pub fn summary_block(s: &RegimeSummary) -> String {
    format!(
        "[Emotional Regime Summary]\n\
         Consultation phase: {}\n\
         Current regime: R{} (valence: {}, arousal: {})\n\
         Regime persistence: {} consecutive turns ({})\n\
         Regime shifts so far: {}\n",
        s.phase,
        s.regime,
        two_decimals(s.valence),
        two_decimals(s.arousal),
        s.persistence,
        if s.stable() { "stable" } else { "unstable" },
        s.shifts_so_far,
    )
}

pub fn run(args: &SummarizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load(&args.input, args.scope, None)?;
    let conv = match &args.id {
        Some(id) => corpus
            .iter()
            .find(|c| c.series.id() == id)
            .ok_or_else(|| CliError::Input(format!("no conversation {id:?} in input")))?,
        None if corpus.len() == 1 => &corpus[0],
        None => return Err(CliError::Input("input has several conversations; pass --id".into())),
    };
    let file = read_model(&args.model)?;
    let model = file.model();
    let labels = match &args.labels {
        Some(p) => {
            let f = read_labels(p)?;
            f.labels.check_len(conv.series.len())?;
            f.labels
        }
        None => viterbi(model, &conv.series)?.0,
    };
    let query = args.query.unwrap_or(labels.len() / 2);
    let summary = RegimeSummary::at(model, &labels, query)?;
    emit(&summary_block(&summary), args.out.as_deref(), out)
}
