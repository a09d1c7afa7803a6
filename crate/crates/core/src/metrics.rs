//! External cluster validity: NMI, ARI and best-matching accuracy.
//!
//! Label values are arbitrary identifiers; only the partition they induce
//! matters.

use std::collections::{BTreeMap, BTreeSet};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::Serialize;

use crate::error::{Result, SkmError};

/// Counts of observations per (reference class, predicted cluster) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let order: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    (labels.iter().map(|l| order[l]).collect(), order.len())
}

impl ContingencyTable {
    pub fn new(reference: &[usize], predicted: &[usize]) -> Result<Self> {
        if reference.len() != predicted.len() {
            return Err(SkmError::DimensionMismatch {
                expected: reference.len(),
                got: predicted.len(),
            });
        }
        if reference.is_empty() {
            return Err(SkmError::Empty("label vectors"));
        }
        let (r, nr) = dense_ids(reference);
        let (p, np) = dense_ids(predicted);
        let mut counts = vec![vec![0u64; np]; nr];
        for (&a, &b) in r.iter().zip(&p) {
            counts[a][b] += 1;
        }
        let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums = (0..np).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: reference.len() as u64,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_sums.len()
    }

    /// Every class maps to exactly one cluster and vice versa.
    fn is_bijection(&self) -> bool {
        self.n_rows() == self.n_cols()
            && self
                .counts
                .iter()
                .all(|row| row.iter().filter(|&&c| c > 0).count() == 1)
    }
}

/// Sums in ascending order so the result does not depend on label order.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn entropy(sizes: &[u64], total: f64) -> f64 {
    ordered_sum(
        sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = s as f64 / total;
                -p * p.ln()
            })
            .collect(),
    )
}

/// Mutual information normalized by the arithmetic mean of the two
/// entropies. Two single-cluster partitions score 1; exactly one
/// single-cluster partition scores 0.
pub fn nmi(reference: &[usize], predicted: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(reference, predicted)?;
    match (t.n_rows() == 1, t.n_cols() == 1) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    if t.is_bijection() {
        return Ok(1.0);
    }
    let n = t.total as f64;
    let mut terms = Vec::new();
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                terms.push(c / n * (n * c / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln());
            }
        }
    }
    let mi = ordered_sum(terms);
    let h = 0.5 * (entropy(&t.row_sums, n) + entropy(&t.col_sums, n));
    Ok((mi / h).clamp(0.0, 1.0))
}

fn pairs(c: u64) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Adjusted Rand index. When the chance-adjusted denominator vanishes (both
/// partitions trivial in the same way) the index is 1.
pub fn ari(reference: &[usize], predicted: &[usize]) -> Result<f64> {
    if reference.len() < 2 && reference.len() == predicted.len() {
        return Err(SkmError::invalid("adjusted Rand index needs at least 2 observations"));
    }
    let t = ContingencyTable::new(reference, predicted)?;
    let index: f64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: f64 = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let b: f64 = t.col_sums.iter().map(|&c| pairs(c)).sum();
    let expected = a * b / pairs(t.total);
    let max = 0.5 * (a + b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Fraction of observations on which the labelings agree under the best
/// one-to-one matching of clusters to classes.
pub fn acc(reference: &[usize], predicted: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(reference, predicted)?;
    let size = t.n_rows().max(t.n_cols());
    let mut weights = Matrix::new(size, size, 0i64);
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            weights[(i, j)] = c as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / t.total as f64)
}

/// The three indices plus class-size CVs, as printed by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub nmi: f64,
    pub ari: f64,
    pub acc: f64,
    pub cv_reference: Option<f64>,
    pub cv_predicted: Option<f64>,
}

impl EvalReport {
    pub fn compute(reference: &[usize], predicted: &[usize]) -> Result<Self> {
        let cv = |labels: &[usize]| {
            let sizes: Vec<usize> = crate::data::class_sizes(labels).into_iter().filter(|&s| s > 0).collect();
            crate::data::coefficient_of_variation(&sizes).ok()
        };
        Ok(Self {
            nmi: nmi(reference, predicted)?,
            ari: ari(reference, predicted)?,
            acc: acc(reference, predicted)?,
            cv_reference: cv(reference),
            cv_predicted: cv(predicted),
        })
    }
}
