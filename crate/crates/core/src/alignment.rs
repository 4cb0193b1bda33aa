//! Hungarian alignment of predicted regime labels onto reference labels.
//!
//! Predicted label `i` and reference label `j` score the number of utterances on which
//! they co-occur. The cost matrix holds the negated counts, is zero-padded to square, and
//! solved exactly; matches against padding are dropped, leaving a partial assignment when
//! the label counts differ.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::types::LabelSequence;

/// `entries[i][j] = -(co-occurrences of predicted i with reference j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    pub entries: Vec<Vec<i64>>,
}

impl CostMatrix {
    /// Predicted label count (rows).
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    /// Reference label count (columns).
    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    fn padded(&self) -> Vec<Vec<i64>> {
        let n = self.rows().max(self.cols());
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.entries.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0))
                    .collect()
            })
            .collect()
    }
}

/// Partial injective map from predicted to reference labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub mapping: BTreeMap<usize, usize>,
    /// Utterances on which matched labels co-occur.
    pub total_overlap: u64,
    /// Reference label count the assignment was solved against.
    pub n_reference: usize,
}

pub fn build_cost_matrix(pred: &LabelSequence, reference: &LabelSequence) -> Result<CostMatrix> {
    reference.check_len(pred.len())?;
    let (m, k) = (pred.label_bound(), reference.label_bound());
    let mut entries = vec![vec![0i64; k]; m];
    for (&p, &r) in pred.labels().iter().zip(reference.labels()) {
        entries[p][r] -= 1;
    }
    Ok(CostMatrix { entries })
}

/// Minimum-cost perfect matching on a square matrix (Kuhn–Munkres with potentials).
/// Returns `assign[row] = col` and the total cost.
pub fn hungarian(cost: &[Vec<i64>]) -> (Vec<usize>, i64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    const INF: i64 = i64::MAX / 4;
    // 1-indexed potentials; column 0 is a sentinel.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[col_owner[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (assign, total)
}

/// Optimal cost of `cost` restricted to the rows and columns not yet fixed.
fn residual_optimum(cost: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    let sub: Vec<Vec<i64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost[i][j]).collect())
        .collect();
    hungarian(&sub).1
}

/// Optimal assignment of predicted to reference labels. Among equally optimal permutations
/// the one with the lexicographically smallest `(row, col)` pairs is chosen.
pub fn solve_assignment(cost: &CostMatrix) -> Assignment {
    let padded = cost.padded();
    let n = padded.len();
    let (_, optimum) = hungarian(&padded);
    // Fix rows in order, each to the smallest column that still admits an optimal completion.
    let mut free_cols: Vec<usize> = (0..n).collect();
    let mut fixed_cost = 0i64;
    let mut perm = vec![0usize; n];
    for i in 0..n {
        let rest_rows: Vec<usize> = ((i + 1)..n).collect();
        for (pos, &j) in free_cols.iter().enumerate() {
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(pos);
            let total = fixed_cost + padded[i][j] + residual_optimum(&padded, &rest_rows, &rest_cols);
            if total == optimum {
                perm[i] = j;
                fixed_cost += padded[i][j];
                free_cols.remove(pos);
                break;
            }
        }
    }
    let mut mapping = BTreeMap::new();
    let mut total_overlap = 0u64;
    for (i, &j) in perm.iter().enumerate() {
        if i < cost.rows() && j < cost.cols() {
            mapping.insert(i, j);
            total_overlap += (-cost.entries[i][j]) as u64;
        }
    }
    Assignment {
        mapping,
        total_overlap,
        n_reference: cost.cols(),
    }
}

/// Rewrites predicted labels through `assignment`. Unmatched predicted labels become fresh
/// integers `K, K + 1, ...` (in ascending order of the original label), `K` being the
/// reference label count.
pub fn remap(pred: &LabelSequence, assignment: &Assignment) -> LabelSequence {
    let mut table = assignment.mapping.clone();
    let mut next = assignment.n_reference;
    let mut unmatched: Vec<usize> = pred
        .labels()
        .iter()
        .copied()
        .filter(|l| !assignment.mapping.contains_key(l))
        .collect();
    unmatched.sort_unstable();
    unmatched.dedup();
    for l in unmatched {
        table.insert(l, next);
        next += 1;
    }
    LabelSequence::new(pred.labels().iter().map(|l| table[l]).collect())
}

/// Cost matrix, assignment and remapped prediction in one step.
pub fn align(pred: &LabelSequence, reference: &LabelSequence) -> Result<(Assignment, LabelSequence)> {
    let cost = build_cost_matrix(pred, reference)?;
    let assignment = solve_assignment(&cost);
    let remapped = remap(pred, &assignment);
    Ok((assignment, remapped))
}
