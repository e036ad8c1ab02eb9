//! Small predictive models with hand-written gradients.
//!
//! Parameters live in one flat vector (row-major tensors back to back), which
//! keeps the SGD update, finite-difference audits and the text dump format
//! all trivial.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Architecture of a [`PredictiveModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Affine scores trained on raw outputs.
    Linear,
    /// Affine scores trained through softmax.
    Logistic,
    /// One ReLU hidden layer, then affine scores.
    Mlp { hidden: usize },
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Squared distance between the output and the soft target; the output is
    /// the softmax for `Logistic` models and the raw scores otherwise.
    Squared,
    /// Soft-target cross entropy on the softmax.
    CrossEntropy,
}

/// A model with flat parameter storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveModel {
    kind: ModelKind,
    input_dim: usize,
    n_classes: usize,
    params: Vec<f64>,
}

impl PredictiveModel {
    /// Fresh model with small Gaussian weights drawn from `rng` and zero
    /// biases.
    pub fn new(
        kind: ModelKind,
        input_dim: usize,
        n_classes: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if input_dim == 0 || n_classes == 0 {
            return Err(Error::invalid("input_dim and n_classes must be positive"));
        }
        if let ModelKind::Mlp { hidden } = kind {
            if hidden == 0 {
                return Err(Error::invalid("hidden width must be positive"));
            }
        }
        let mut model = PredictiveModel {
            kind,
            input_dim,
            n_classes,
            params: vec![0.0; param_count(kind, input_dim, n_classes)],
        };
        let (weight_scales, shapes) = (model.weight_scales(), model.tensor_shapes());
        let mut offset = 0;
        for ((rows, cols), scale) in shapes.into_iter().zip(weight_scales) {
            let len = rows * cols;
            if cols > 1 || scale > 0.0 {
                for v in &mut model.params[offset..offset + len] {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = scale * z;
                }
            }
            offset += len;
        }
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn hidden(&self) -> usize {
        match self.kind {
            ModelKind::Mlp { hidden } => hidden,
            _ => 0,
        }
    }

    /// Tensor layout as (rows, cols) in parameter order; biases are columns
    /// of width 1.
    fn tensor_shapes(&self) -> Vec<(usize, usize)> {
        let (p, k) = (self.input_dim, self.n_classes);
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => vec![(k, p), (k, 1)],
            ModelKind::Mlp { hidden } => {
                vec![(hidden, p), (hidden, 1), (k, hidden), (k, 1)]
            }
        }
    }

    fn tensor_names(&self) -> Vec<&'static str> {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => vec!["w", "b"],
            ModelKind::Mlp { .. } => vec!["w1", "b1", "w2", "b2"],
        }
    }

    fn weight_scales(&self) -> Vec<f64> {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => vec![0.01, 0.0],
            ModelKind::Mlp { hidden } => vec![
                (2.0 / self.input_dim as f64).sqrt(),
                0.0,
                (2.0 / hidden as f64).sqrt(),
                0.0,
            ],
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                got: values.len(),
            });
        }
        self.params.copy_from_slice(values);
        Ok(())
    }

    /// Unscaled class scores.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(match self.kind {
            ModelKind::Linear | ModelKind::Logistic => self.affine(x, 0, self.n_classes, x.len()),
            ModelKind::Mlp { hidden } => {
                let mut a = self.affine(x, 0, hidden, x.len());
                for v in &mut a {
                    *v = v.max(0.0);
                }
                self.affine(&a, hidden * (self.input_dim + 1), self.n_classes, hidden)
            }
        })
    }

    /// Post-activation hidden layer, the representation before the
    /// classifier head. Only one-hidden-layer models have one.
    pub fn hidden_representation(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ModelKind::Mlp { hidden } = self.kind else {
            return Err(Error::invalid(
                "affine models have no hidden representation",
            ));
        };
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut a = self.affine(x, 0, hidden, x.len());
        for v in &mut a {
            *v = v.max(0.0);
        }
        Ok(a)
    }

    /// Affine map using the tensor block starting at `offset`: a `rows x
    /// cols` weight matrix followed by `rows` biases.
    fn affine(&self, x: &[f64], offset: usize, rows: usize, cols: usize) -> Vec<f64> {
        let w = &self.params[offset..offset + rows * cols];
        let b = &self.params[offset + rows * cols..offset + rows * cols + rows];
        (0..rows)
            .map(|r| {
                let row = &w[r * cols..(r + 1) * cols];
                row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b[r]
            })
            .collect()
    }

    // ----- text dump -------------------------------------------------------

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::Mlp { .. } => "mlp",
        };
        let _ = writeln!(out, "kind = {kind}");
        let _ = writeln!(out, "input_dim = {}", self.input_dim);
        let _ = writeln!(out, "n_classes = {}", self.n_classes);
        let _ = writeln!(out, "hidden = {}", self.hidden());
        let mut offset = 0;
        for (name, (rows, cols)) in self.tensor_names().iter().zip(self.tensor_shapes()) {
            let _ = writeln!(out, "tensor {name} {rows} {cols}");
            for r in 0..rows {
                let row: Vec<String> = (0..cols)
                    .map(|c| crate::fmt_g17(self.params[offset + r * cols + c]))
                    .collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            offset += rows * cols;
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        let mut header = std::collections::BTreeMap::new();
        while let Some(&(_, line)) = lines.peek() {
            if line.starts_with("tensor ") {
                break;
            }
            let (no, line) = lines.next().unwrap();
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: no + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            header.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("missing header field {k}"),
                })
                .cloned()
        };
        let parse_usize = |s: String| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: 1,
                message: format!("bad integer {s:?}: {e}"),
            })
        };
        let input_dim = parse_usize(get("input_dim")?)?;
        let n_classes = parse_usize(get("n_classes")?)?;
        let hidden = parse_usize(get("hidden")?)?;
        let kind = match get("kind")?.as_str() {
            "linear" => ModelKind::Linear,
            "logistic" => ModelKind::Logistic,
            "mlp" => ModelKind::Mlp { hidden },
            other => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unknown kind {other:?}"),
                })
            }
        };
        let mut model = PredictiveModel {
            kind,
            input_dim,
            n_classes,
            params: vec![0.0; param_count(kind, input_dim, n_classes)],
        };
        let mut offset = 0;
        for (name, (rows, cols)) in model.tensor_names().iter().zip(model.tensor_shapes()) {
            let (no, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("missing tensor {name}"),
            })?;
            let want = format!("tensor {name} {rows} {cols}");
            if line.trim() != want {
                return Err(Error::Parse {
                    line: no + 1,
                    message: format!("expected {want:?}, got {line:?}"),
                });
            }
            for r in 0..rows {
                let (no, line) = lines.next().ok_or(Error::Parse {
                    line: 0,
                    message: format!("missing row {r} of tensor {name}"),
                })?;
                let values: Vec<&str> = line.split_whitespace().collect();
                if values.len() != cols {
                    return Err(Error::Parse {
                        line: no + 1,
                        message: format!("expected {cols} values, got {}", values.len()),
                    });
                }
                for (c, v) in values.iter().enumerate() {
                    model.params[offset + r * cols + c] =
                        v.parse::<f64>().map_err(|e| Error::Parse {
                            line: no + 1,
                            message: format!("bad float {v:?}: {e}"),
                        })?;
                }
            }
            offset += rows * cols;
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn param_count(kind: ModelKind, p: usize, k: usize) -> usize {
    match kind {
        ModelKind::Linear | ModelKind::Logistic => k * (p + 1),
        ModelKind::Mlp { hidden } => hidden * (p + 1) + k * (hidden + 1),
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    for v in &mut e {
        *v /= s;
    }
    e
}

/// Loss and gradient with respect to the scores, for one sample.
pub(crate) fn loss_and_score_grad(
    kind: ModelKind,
    loss: Loss,
    scores: &[f64],
    target: &[f64],
) -> (f64, Vec<f64>) {
    match loss {
        Loss::CrossEntropy => {
            let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + scores.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            let value = target
                .iter()
                .zip(scores)
                .map(|(t, z)| t * (lse - z))
                .sum::<f64>();
            let s = softmax(scores);
            let grad = s.iter().zip(target).map(|(si, ti)| si - ti).collect();
            (value, grad)
        }
        Loss::Squared => {
            if matches!(kind, ModelKind::Logistic) {
                let s = softmax(scores);
                let r: Vec<f64> = s.iter().zip(target).map(|(si, ti)| si - ti).collect();
                let value = r.iter().map(|v| v * v).sum();
                // d/dz ||softmax(z) − t||² = 2·(diag(s) − ssᵀ)·(s − t)
                let rs: f64 = r.iter().zip(&s).map(|(ri, si)| ri * si).sum();
                let grad = s
                    .iter()
                    .zip(&r)
                    .map(|(si, ri)| 2.0 * si * (ri - rs))
                    .collect();
                (value, grad)
            } else {
                let r: Vec<f64> = scores.iter().zip(target).map(|(z, t)| z - t).collect();
                let value = r.iter().map(|v| v * v).sum();
                let grad = r.iter().map(|v| 2.0 * v).collect();
                (value, grad)
            }
        }
    }
}

/// Weighted-mean loss over a batch and its gradient in flat parameter
/// layout. Targets must be probability rows; weights must be non-negative
/// with a positive sum.
pub fn loss_and_grad(
    model: &PredictiveModel,
    features: &[Vec<f64>],
    soft_targets: &[Vec<f64>],
    loss: Loss,
    sample_weights: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let n = features.len();
    if soft_targets.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: soft_targets.len(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("empty batch"));
    }
    if let Some(w) = sample_weights {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.len(),
            });
        }
        if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::invalid("sample weights must be non-negative"));
        }
    }
    let total_weight: f64 = match sample_weights {
        Some(w) => w.iter().sum(),
        None => n as f64,
    };
    if total_weight <= 0.0 || !total_weight.is_finite() {
        return Err(Error::invalid("sample weights sum to zero"));
    }
    let k = model.n_classes();
    let p = model.input_dim();
    let mut grad = vec![0.0; model.params().len()];
    let mut total_loss = 0.0;
    for i in 0..n {
        let x = &features[i];
        let t = &soft_targets[i];
        if t.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: t.len(),
            });
        }
        let sum_t: f64 = t.iter().sum();
        if (sum_t - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "soft target row {i} sums to {sum_t}, expected 1"
            )));
        }
        let weight = sample_weights.map_or(1.0, |w| w[i]) / total_weight;
        match model.kind {
            ModelKind::Linear | ModelKind::Logistic => {
                let scores = model.forward(x)?;
                let (value, dz) = loss_and_score_grad(model.kind, loss, &scores, t);
                total_loss += weight * value;
                for r in 0..k {
                    let g = weight * dz[r];
                    for c in 0..p {
                        grad[r * p + c] += g * x[c];
                    }
                    grad[k * p + r] += g;
                }
            }
            ModelKind::Mlp { hidden } => {
                if x.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: x.len(),
                    });
                }
                let pre = model.affine(x, 0, hidden, p);
                let act: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
                let off2 = hidden * (p + 1);
                let scores = model.affine(&act, off2, k, hidden);
                let (value, dz) = loss_and_score_grad(model.kind, loss, &scores, t);
                total_loss += weight * value;
                let w2 = &model.params[off2..off2 + k * hidden];
                let mut d_act = vec![0.0; hidden];
                for r in 0..k {
                    let g = weight * dz[r];
                    for c in 0..hidden {
                        grad[off2 + r * hidden + c] += g * act[c];
                        d_act[c] += g * w2[r * hidden + c];
                    }
                    grad[off2 + k * hidden + r] += g;
                }
                for h in 0..hidden {
                    if pre[h] > 0.0 {
                        for c in 0..p {
                            grad[h * p + c] += d_act[h] * x[c];
                        }
                        grad[hidden * p + h] += d_act[h];
                    }
                }
            }
        }
    }
    if !total_loss.is_finite() {
        return Err(Error::invalid("loss is not finite"));
    }
    Ok((total_loss, grad))
}
