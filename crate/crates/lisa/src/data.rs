//! Labeled, domain-tagged datasets and group indexing.
//!
//! A [`Sample`] is an `(x, y, d)` triple: a feature vector, a class label and
//! a domain tag. A group is a `(domain, label)` pair; worst-group evaluation
//! and selective pairing both run over the [`GroupIndex`] built here.
//!
//! Datasets round-trip through a delimited text table with header
//! `d,y,x0,...,x{p-1}`; features are written with 17 significant digits so a
//! save → load cycle is lossless.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// One observation: features, class label, domain tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
    pub domain: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: usize, domain: usize) -> Self {
        Sample {
            features,
            label,
            domain,
        }
    }
}

/// A `(domain, label)` pair; the unit of worst-group evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub domain: usize,
    pub label: usize,
}

impl GroupKey {
    pub fn new(domain: usize, label: usize) -> Self {
        GroupKey { domain, label }
    }
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(d={},y={})", self.domain, self.label)
    }
}

/// An ordered collection of samples with declared feature dimension, class
/// count and domain count.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_dim: usize,
    n_classes: usize,
    n_domains: usize,
}

impl Dataset {
    pub fn new(
        samples: Vec<Sample>,
        feature_dim: usize,
        n_classes: usize,
        n_domains: usize,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if n_classes == 0 || n_domains == 0 {
            return Err(Error::invalid("class and domain counts must be positive"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: feature_dim,
                    got: s.features.len(),
                });
            }
            if s.label >= n_classes {
                return Err(Error::invalid(format!(
                    "sample {i}: label {} out of range [0,{n_classes})",
                    s.label
                )));
            }
            if s.domain >= n_domains {
                return Err(Error::invalid(format!(
                    "sample {i}: domain {} out of range [0,{n_domains})",
                    s.domain
                )));
            }
        }
        Ok(Dataset {
            samples,
            feature_dim,
            n_classes,
            n_domains,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_domains(&self) -> usize {
        self.n_domains
    }

    pub fn sample(&self, i: usize) -> &Sample {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn group_of(&self, i: usize) -> GroupKey {
        let s = &self.samples[i];
        GroupKey::new(s.domain, s.label)
    }

    /// Serialize as `d,y,x0,...` with 17-significant-digit features.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str("d,y");
        for j in 0..self.feature_dim {
            let _ = write!(out, ",x{j}");
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{},{}", s.domain, s.label);
            for v in &s.features {
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
                message: "expected header d,y,x0,...".into(),
            });
        }
        let p = cols.len() - 2;
        let mut samples = Vec::new();
        let mut max_label = 0usize;
        let mut max_domain = 0usize;
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != p + 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", p + 2, fields.len()),
                });
            }
            let parse_int = |s: &str| {
                s.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad integer {s:?}: {e}"),
                })
            };
            let domain = parse_int(fields[0])?;
            let label = parse_int(fields[1])?;
            let mut features = Vec::with_capacity(p);
            for f in &fields[2..] {
                features.push(f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad float {f:?}: {e}"),
                })?);
            }
            max_label = max_label.max(label);
            max_domain = max_domain.max(domain);
            samples.push(Sample::new(features, label, domain));
        }
        Dataset::new(samples, p, max_label + 1, max_domain + 1)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table(&text)
    }
}

/// Positions bucketed by group, by label and by domain.
///
/// The occupied-group map partitions the dataset index set: every position
/// appears exactly once under its `(d, y)` key, and groups with no samples
/// get no key.
#[derive(Debug, Clone)]
pub struct GroupIndex {
    groups: BTreeMap<GroupKey, Vec<usize>>,
    by_label: Vec<Vec<usize>>,
    by_domain: Vec<Vec<usize>>,
    n: usize,
}

/// Buckets every sample position under its `(d, y)` key.
pub fn build_group_index(dataset: &Dataset) -> GroupIndex {
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    let mut by_label = vec![Vec::new(); dataset.n_classes()];
    let mut by_domain = vec![Vec::new(); dataset.n_domains()];
    for (i, s) in dataset.samples().iter().enumerate() {
        groups
            .entry(GroupKey::new(s.domain, s.label))
            .or_default()
            .push(i);
        by_label[s.label].push(i);
        by_domain[s.domain].push(i);
    }
    GroupIndex {
        groups,
        by_label,
        by_domain,
        n: dataset.len(),
    }
}

impl GroupIndex {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Positions in one group, or `None` if the group is unoccupied.
    pub fn group(&self, key: GroupKey) -> Option<&[usize]> {
        self.groups.get(&key).map(|v| v.as_slice())
    }

    /// Occupied groups in deterministic (domain, label) order.
    pub fn occupied(&self) -> impl Iterator<Item = (GroupKey, &[usize])> {
        self.groups.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn label_positions(&self, label: usize) -> &[usize] {
        &self.by_label[label]
    }

    pub fn domain_positions(&self, domain: usize) -> &[usize] {
        &self.by_domain[domain]
    }

    pub fn n_labels(&self) -> usize {
        self.by_label.len()
    }

    pub fn n_domains(&self) -> usize {
        self.by_domain.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(pairs: &[(usize, usize)]) -> Dataset {
        let samples: Vec<Sample> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(d, y))| Sample::new(vec![i as f64, -(i as f64)], y, d))
            .collect();
        let k = pairs.iter().map(|p| p.1).max().unwrap() + 1;
        let nd = pairs.iter().map(|p| p.0).max().unwrap() + 1;
        Dataset::new(samples, 2, k, nd).unwrap()
    }

    #[test]
    fn buckets_positions_by_group() {
        let ds = toy(&[(0, 0), (0, 0), (1, 1), (1, 1)]);
        let idx = build_group_index(&ds);
        assert_eq!(idx.group(GroupKey::new(0, 0)), Some(&[0usize, 1][..]));
        assert_eq!(idx.group(GroupKey::new(1, 1)), Some(&[2usize, 3][..]));
        assert_eq!(idx.n_groups(), 2);
    }

    #[test]
    fn no_phantom_keys_for_empty_groups() {
        let ds = toy(&[(0, 0), (1, 1)]);
        let idx = build_group_index(&ds);
        assert!(idx.group(GroupKey::new(0, 1)).is_none());
        assert_eq!(idx.n_groups(), 2);
    }

    #[test]
    fn single_sample_dataset() {
        let ds = toy(&[(0, 0)]);
        let idx = build_group_index(&ds);
        assert_eq!(idx.group(GroupKey::new(0, 0)), Some(&[0usize][..]));
        assert_eq!(idx.n_groups(), 1);
    }

    #[test]
    fn rejects_out_of_range_labels() {
        let s = vec![Sample::new(vec![0.0], 3, 0)];
        assert!(Dataset::new(s, 1, 2, 1).is_err());
    }

    #[test]
    fn rejects_mismatched_dims() {
        let s = vec![
            Sample::new(vec![0.0, 1.0], 0, 0),
            Sample::new(vec![0.0], 0, 0),
        ];
        assert!(Dataset::new(s, 2, 1, 1).is_err());
    }

    #[test]
    fn table_round_trip_is_lossless() {
        let ds = toy(&[(0, 0), (1, 1), (0, 1)]);
        let mut samples = ds.samples().to_vec();
        samples[0].features = vec![std::f64::consts::PI, 1.0 / 3.0];
        samples[1].features = vec![-1.2345678901234567e-12, 9.876543210987654e300];
        let ds = Dataset::new(samples, 2, 2, 2).unwrap();
        let reloaded = Dataset::from_table(&ds.to_table()).unwrap();
        assert_eq!(reloaded.len(), ds.len());
        for (a, b) in ds.samples().iter().zip(reloaded.samples()) {
            assert_eq!(a.features, b.features);
            assert_eq!(a.label, b.label);
            assert_eq!(a.domain, b.domain);
        }
    }

    proptest! {
        #[test]
        fn group_lists_partition_the_index_set(
            pairs in proptest::collection::vec((0usize..3, 0usize..4), 1..60)
        ) {
            let ds = toy(&pairs);
            let idx = build_group_index(&ds);
            let mut seen = vec![false; ds.len()];
            for (key, positions) in idx.occupied() {
                for &p in positions {
                    prop_assert!(!seen[p], "position {} listed twice", p);
                    seen[p] = true;
                    prop_assert_eq!(ds.group_of(p), key);
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            let total: usize = idx.occupied().map(|(_, v)| v.len()).sum();
            prop_assert_eq!(total, ds.len());
        }
    }
}
