//! Covariance algebra: Σ⁻¹ inner products, Σ-norms and rank-one-updated
//! solves.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// A positive-definite covariance with its Cholesky factor, exposing the
/// Σ⁻¹ inner product ⟨u, v⟩ = uᵀΣ⁻¹v and the norm ‖v‖_Σ = √(vᵀΣ⁻¹v).
#[derive(Debug, Clone)]
pub struct SigmaOps {
    sigma: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl SigmaOps {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() || sigma.nrows() == 0 {
            return Err(Error::NotPositiveDefinite);
        }
        let max_asym = (&sigma - sigma.transpose()).abs().max();
        if max_asym > 1e-12 * (1.0 + sigma.abs().max()) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = Cholesky::new(sigma.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(SigmaOps { sigma, chol })
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Σ⁻¹ v.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    /// uᵀ Σ⁻¹ v.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&self.solve(v))
    }

    /// ‖v‖_Σ = √(vᵀ Σ⁻¹ v).
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// bᵀ Σ b.
    pub fn quad(&self, b: &DVector<f64>) -> f64 {
        b.dot(&(&self.sigma * b))
    }

    /// Lower Cholesky factor L with Σ = L Lᵀ.
    pub fn chol_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// L⁻¹ v, the whitening map.
    pub fn whiten(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(v)
            .expect("Cholesky factor is nonsingular")
    }

    /// (Σ + a·uuᵀ)⁻¹ v by the Sherman–Morrison identity; requires
    /// 1 + a·uᵀΣ⁻¹u > 0, which holds for any a ≥ 0.
    pub fn rank_one_solve(
        &self,
        a: f64,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let si_u = self.solve(u);
        let si_v = self.solve(v);
        let denom = 1.0 + a * u.dot(&si_u);
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let scale = a * u.dot(&si_v) / denom;
        Ok(si_v - si_u * scale)
    }
}
