//! The two-domain, two-class Gaussian mixture and its fixture file format.

use super::sigma::SigmaOps;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Domain indices: the two training domains are mapped R → 0, G → 1.
pub const DOMAIN_R: usize = 0;
/// See [`DOMAIN_R`].
pub const DOMAIN_G: usize = 1;

/// Mixture parameters: four conditional means μ^(y,d), a shared covariance Σ
/// and the minority proportion α, with
/// P(y=0,d=R) = P(y=1,d=G) = α and class/domain marginals ½.
///
/// The class difference is domain-invariant by construction:
/// μ^(1,R) − μ^(0,R) = μ^(1,G) − μ^(0,G).
#[derive(Debug, Clone)]
pub struct ModelParams {
    mu_0r: DVector<f64>,
    mu_0g: DVector<f64>,
    mu_1r: DVector<f64>,
    mu_1g: DVector<f64>,
    sigma: DMatrix<f64>,
    alpha: f64,
    ops: SigmaOps,
}

impl ModelParams {
    pub fn new(
        mu_0r: DVector<f64>,
        mu_0g: DVector<f64>,
        mu_1r: DVector<f64>,
        mu_1g: DVector<f64>,
        sigma: DMatrix<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let p = mu_0r.len();
        for (name, v) in [("mu_0g", &mu_0g), ("mu_1r", &mu_1r), ("mu_1g", &mu_1g)] {
            if v.len() != p {
                return Err(Error::invalid(format!(
                    "{name} has dimension {}, expected {p}",
                    v.len()
                )));
            }
        }
        if sigma.nrows() != p || sigma.ncols() != p {
            return Err(Error::invalid(format!(
                "sigma is {}x{}, expected {p}x{p}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(Error::invalid(format!(
                "minority proportion must lie in (0, 1/4), got {alpha}"
            )));
        }
        let invariance_gap = ((&mu_1r - &mu_0r) - (&mu_1g - &mu_0g)).abs().max();
        if invariance_gap > 1e-10 {
            return Err(Error::invalid(format!(
                "class difference is not domain-invariant (gap {invariance_gap:.3e})"
            )));
        }
        let ops = SigmaOps::new(sigma.clone())?;
        Ok(ModelParams {
            mu_0r,
            mu_0g,
            mu_1r,
            mu_1g,
            sigma,
            alpha,
            ops,
        })
    }

    /// Canonical construction used by sweeps: Σ = I, the class difference Δ
    /// along the first axis with ‖Δ‖_Σ = `delta_norm`, the marginal class
    /// difference in the first two axes with ‖Δ̃‖_Σ = `delta_tilde_norm` and
    /// Σ-correlation `xi` to Δ, and the overall mean at the origin.
    pub fn canonical(
        xi: f64,
        alpha: f64,
        delta_norm: f64,
        delta_tilde_norm: f64,
        dim: usize,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("canonical construction needs dim >= 2"));
        }
        if !(-1.0 < xi && xi < 1.0) {
            return Err(Error::invalid(format!("xi must lie in (-1,1), got {xi}")));
        }
        if !(delta_norm > 0.0 && delta_tilde_norm > 0.0) {
            return Err(Error::invalid("norms must be positive"));
        }
        let mut delta = DVector::zeros(dim);
        delta[0] = delta_norm;
        let mut delta_tilde = DVector::zeros(dim);
        delta_tilde[0] = delta_tilde_norm * xi;
        delta_tilde[1] = delta_tilde_norm * (1.0 - xi * xi).sqrt();
        // delta_tilde = delta - (1 - 4a) * delta0 pins delta0
        let delta0 = (&delta - &delta_tilde) / (1.0 - 4.0 * alpha);
        let mu_0g = &delta0 * 0.5 - &delta * 0.5;
        let mu_0r = &delta0 * -0.5 - &delta * 0.5;
        let mu_1g = &mu_0g + &delta;
        let mu_1r = &mu_0r + &delta;
        ModelParams::new(
            mu_0r,
            mu_0g,
            mu_1r,
            mu_1g,
            DMatrix::identity(dim, dim),
            alpha,
        )
    }

    pub fn dim(&self) -> usize {
        self.mu_0r.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub(crate) fn ops(&self) -> &SigmaOps {
        &self.ops
    }

    /// Conditional mean μ^(y,d) with domains indexed R → 0, G → 1.
    pub fn mu(&self, label: usize, domain: usize) -> Result<&DVector<f64>> {
        match (label, domain) {
            (0, DOMAIN_R) => Ok(&self.mu_0r),
            (0, DOMAIN_G) => Ok(&self.mu_0g),
            (1, DOMAIN_R) => Ok(&self.mu_1r),
            (1, DOMAIN_G) => Ok(&self.mu_1g),
            _ => Err(Error::invalid(format!(
                "group (d={domain}, y={label}) outside the 2x2 mixture"
            ))),
        }
    }

    /// Group proportion π^(y,d).
    pub fn proportion(&self, label: usize, domain: usize) -> Result<f64> {
        match (label, domain) {
            (0, DOMAIN_R) | (1, DOMAIN_G) => Ok(self.alpha),
            (0, DOMAIN_G) | (1, DOMAIN_R) => Ok(0.5 - self.alpha),
            _ => Err(Error::invalid(format!(
                "group (d={domain}, y={label}) outside the 2x2 mixture"
            ))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        ModelFixture {
            params: self.clone(),
            target_means: None,
        }
        .save(path)
    }
}

/// Derived population statistics of a [`ModelParams`].
///
/// `delta` is the invariant class difference, `delta_tilde` the marginal
/// class difference E[x|y=1] − E[x|y=0], `delta0` the domain offset
/// μ^(0,G) − μ^(0,R), and `theta_g`/`theta_r` the class-0 means centered at
/// the overall mean. `xi` is the Σ⁻¹ correlation between `delta` and
/// `delta_tilde`; small ξ signals strong spurious correlation between domain
/// and label.
#[derive(Debug, Clone)]
pub struct DerivedStats {
    pub delta: DVector<f64>,
    pub delta_tilde: DVector<f64>,
    pub delta0: DVector<f64>,
    pub theta_g: DVector<f64>,
    pub theta_r: DVector<f64>,
    pub mean_x: DVector<f64>,
    pub xi: f64,
    pub norm_delta: f64,
    pub norm_delta_tilde: f64,
}

/// Population statistics from the mixture weights
/// (α on the minority groups, ½ − α on the majority groups).
pub fn derive_stats(params: &ModelParams) -> Result<DerivedStats> {
    let a = params.alpha();
    let (w_min, w_maj) = (2.0 * a, 1.0 - 2.0 * a);
    let mean_x1 = params.mu(1, DOMAIN_G)? * w_min + params.mu(1, DOMAIN_R)? * w_maj;
    let mean_x0 = params.mu(0, DOMAIN_R)? * w_min + params.mu(0, DOMAIN_G)? * w_maj;
    let delta_tilde = &mean_x1 - &mean_x0;
    let mean_x = (&mean_x1 + &mean_x0) * 0.5;
    let delta = params.mu(1, DOMAIN_G)? - params.mu(0, DOMAIN_G)?;
    let delta0 = params.mu(0, DOMAIN_G)? - params.mu(0, DOMAIN_R)?;
    let theta_g = params.mu(0, DOMAIN_G)? - &mean_x;
    let theta_r = params.mu(0, DOMAIN_R)? - &mean_x;
    let ops = params.ops();
    let norm_delta = ops.norm(&delta);
    let norm_delta_tilde = ops.norm(&delta_tilde);
    if norm_delta < 1e-14 || norm_delta_tilde < 1e-14 {
        return Err(Error::invalid(
            "class differences vanish; correlation xi is undefined",
        ));
    }
    let xi = ops.inner(&delta, &delta_tilde) / (norm_delta * norm_delta_tilde);
    Ok(DerivedStats {
        delta,
        delta_tilde,
        delta0,
        theta_g,
        theta_r,
        mean_x,
        xi,
        norm_delta,
        norm_delta_tilde,
    })
}

// ---------------------------------------------------------------------------
// fixture files
// ---------------------------------------------------------------------------

/// A model fixture: parameters plus an optional new-domain target, stored as
/// key/value text with nested arrays.
#[derive(Debug, Clone)]
pub struct ModelFixture {
    pub params: ModelParams,
    /// `(mu_0star, mu_1star)` of a held-out domain, when present.
    pub target_means: Option<(DVector<f64>, DVector<f64>)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixture {
    p: usize,
    alpha: f64,
    mu_0r: Vec<f64>,
    mu_0g: Vec<f64>,
    mu_1r: Vec<f64>,
    mu_1g: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<RawTarget>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    mu_0star: Vec<f64>,
    mu_1star: Vec<f64>,
}

impl ModelFixture {
    pub fn from_text(text: &str) -> Result<Self> {
        let raw: RawFixture =
            toml::from_str(text).map_err(|e| Error::Config(format!("fixture: {e}")))?;
        let p = raw.p;
        let vec = |name: &str, v: &[f64]| -> Result<DVector<f64>> {
            if v.len() != p {
                return Err(Error::Config(format!(
                    "fixture: {name} has {} entries, expected p = {p}",
                    v.len()
                )));
            }
            Ok(DVector::from_column_slice(v))
        };
        if raw.sigma.len() != p || raw.sigma.iter().any(|row| row.len() != p) {
            return Err(Error::Config(format!("fixture: sigma must be {p}x{p}")));
        }
        let mut sigma = DMatrix::zeros(p, p);
        for (i, row) in raw.sigma.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                sigma[(i, j)] = *v;
            }
        }
        let params = ModelParams::new(
            vec("mu_0r", &raw.mu_0r)?,
            vec("mu_0g", &raw.mu_0g)?,
            vec("mu_1r", &raw.mu_1r)?,
            vec("mu_1g", &raw.mu_1g)?,
            sigma,
            raw.alpha,
        )?;
        let target_means = match raw.target {
            None => None,
            Some(t) => Some((vec("mu_0star", &t.mu_0star)?, vec("mu_1star", &t.mu_1star)?)),
        };
        Ok(ModelFixture {
            params,
            target_means,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path)?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let raw = RawFixture {
            p: p.dim(),
            alpha: p.alpha(),
            mu_0r: p.mu_0r.iter().cloned().collect(),
            mu_0g: p.mu_0g.iter().cloned().collect(),
            mu_1r: p.mu_1r.iter().cloned().collect(),
            mu_1g: p.mu_1g.iter().cloned().collect(),
            sigma: (0..p.dim())
                .map(|i| (0..p.dim()).map(|j| p.sigma[(i, j)]).collect())
                .collect(),
            target: self.target_means.as_ref().map(|(m0, m1)| RawTarget {
                mu_0star: m0.iter().cloned().collect(),
                mu_1star: m1.iter().cloned().collect(),
            }),
        };
        toml::to_string(&raw).expect("fixture serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
