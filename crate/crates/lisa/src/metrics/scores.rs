//! Score sets: per-sample logits or representations tagged with label and
//! domain.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::train::PredictiveModel;
use std::fmt::Write as _;
use std::path::Path;

/// Rows of (score vector, label, domain) with a uniform score dimension.
#[derive(Debug, Clone)]
pub struct ScoreSet {
    scores: Vec<Vec<f64>>,
    labels: Vec<usize>,
    domains: Vec<usize>,
    dim: usize,
    n_labels: usize,
    n_domains: usize,
}

impl ScoreSet {
    pub fn new(scores: Vec<Vec<f64>>, labels: Vec<usize>, domains: Vec<usize>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if scores.len() != labels.len() || scores.len() != domains.len() {
            return Err(Error::DimensionMismatch {
                expected: scores.len(),
                got: labels.len().min(domains.len()),
            });
        }
        let dim = scores[0].len();
        if dim == 0 || scores.iter().any(|s| s.len() != dim) {
            return Err(Error::invalid("score rows must share a positive dimension"));
        }
        let n_labels = labels.iter().max().unwrap() + 1;
        let n_domains = domains.iter().max().unwrap() + 1;
        Ok(ScoreSet {
            scores,
            labels,
            domains,
            dim,
            n_labels,
            n_domains,
        })
    }

    /// Model logits over a dataset.
    pub fn from_model(model: &PredictiveModel, dataset: &Dataset) -> Result<Self> {
        Self::collect(dataset, |s| model.forward(&s.features))
    }

    /// Pre-classifier hidden representations over a dataset (one-hidden-layer
    /// models only); feeds the representation-level KL metric.
    pub fn from_model_representations(model: &PredictiveModel, dataset: &Dataset) -> Result<Self> {
        Self::collect(dataset, |s| model.hidden_representation(&s.features))
    }

    fn collect(
        dataset: &Dataset,
        mut score_of: impl FnMut(&crate::data::Sample) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        let mut scores = Vec::with_capacity(dataset.len());
        let mut labels = Vec::with_capacity(dataset.len());
        let mut domains = Vec::with_capacity(dataset.len());
        for s in dataset.samples() {
            scores.push(score_of(s)?);
            labels.push(s.label);
            domains.push(s.domain);
        }
        ScoreSet::new(scores, labels, domains)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn n_domains(&self) -> usize {
        self.n_domains
    }

    pub fn score(&self, i: usize) -> &[f64] {
        &self.scores[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn domain(&self, i: usize) -> usize {
        self.domains[i]
    }

    /// Positions in one (label, domain) cell.
    pub fn cell(&self, label: usize, domain: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label && self.domains[i] == domain)
            .collect()
    }

    /// Serialize as `d,y,g0,...` with 17-significant-digit scores.
    pub fn to_table(&self) -> String {
        let mut out = String::from("d,y");
        for j in 0..self.dim {
            let _ = write!(out, ",g{j}");
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{},{}", self.domains[i], self.labels[i]);
            for v in &self.scores[i] {
                let _ = write!(out, ",{}", crate::fmt_g17(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_table())?;
        Ok(())
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "d" || cols[1] != "y" {
            return Err(Error::Parse {
                line: 1,
                message: "expected header d,y,g0,...".into(),
            });
        }
        let dim = cols.len() - 2;
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        let mut domains = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", dim + 2, fields.len()),
                });
            }
            let parse_int = |s: &str| {
                s.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad integer {s:?}: {e}"),
                })
            };
            domains.push(parse_int(fields[0])?);
            labels.push(parse_int(fields[1])?);
            let mut row = Vec::with_capacity(dim);
            for f in &fields[2..] {
                row.push(f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad float {f:?}: {e}"),
                })?);
            }
            scores.push(row);
        }
        ScoreSet::new(scores, labels, domains)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&std::fs::read_to_string(path)?)
    }
}
