//! Spurious-correlation strength as a normalized χ² association.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Label × domain count table k_{y,d}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    /// Rows are labels, columns are domains.
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.is_empty() || counts[0].is_empty() {
            return Err(Error::invalid("contingency table must be non-empty"));
        }
        let cols = counts[0].len();
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("contingency table rows differ in length"));
        }
        if counts.iter().flatten().sum::<u64>() == 0 {
            return Err(Error::invalid("contingency table has zero total count"));
        }
        Ok(ContingencyTable { counts })
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let mut counts = vec![vec![0u64; dataset.n_domains()]; dataset.n_classes()];
        for s in dataset.samples() {
            counts[s.label][s.domain] += 1;
        }
        ContingencyTable { counts }
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.counts[0].len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transposed(&self) -> Self {
        let counts = (0..self.n_cols())
            .map(|c| (0..self.n_rows()).map(|r| self.counts[r][c]).collect())
            .collect();
        ContingencyTable { counts }
    }
}

/// Cramér's V: √(χ² / (N · min(|Y|−1, |D|−1))), with expected counts
/// k̃_{y,d} = (row marginal · column marginal) / N. Zero for independent
/// tables, one for perfect association.
pub fn cramers_v(table: &ContingencyTable) -> Result<f64> {
    let r = table.n_rows();
    let c = table.n_cols();
    if r < 2 || c < 2 {
        return Err(Error::invalid(
            "Cramér's V needs at least 2 labels and 2 domains",
        ));
    }
    let n = table.total() as f64;
    let row_marginals: Vec<f64> = (0..r)
        .map(|i| table.counts()[i].iter().sum::<u64>() as f64)
        .collect();
    let col_marginals: Vec<f64> = (0..c)
        .map(|j| (0..r).map(|i| table.counts()[i][j]).sum::<u64>() as f64)
        .collect();
    if row_marginals
        .iter()
        .chain(&col_marginals)
        .any(|&m| m == 0.0)
    {
        return Err(Error::invalid(
            "zero row or column marginal: expected counts are undefined",
        ));
    }
    let mut chi2 = 0.0;
    for (row, row_marginal) in table.counts().iter().zip(&row_marginals) {
        for (&count, col_marginal) in row.iter().zip(&col_marginals) {
            let expected = row_marginal * col_marginal / n;
            let diff = count as f64 - expected;
            chi2 += diff * diff / expected;
        }
    }
    let denom = n * (r.min(c) - 1) as f64;
    Ok((chi2 / denom).sqrt().min(1.0))
}
