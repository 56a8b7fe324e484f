//! Conditioned Gaussian Markov random field prior for the free knots
//! `u_1..u_n` given the known `u_0`, plus the Gamma hyperprior on σ₂.
//!
//! The unconditioned field has the tridiagonal precision
//! `Â = (1/τ²) tridiag(−1, 2, −1)` of size `(n+1)×(n+1)`. Conditioning on
//! the first coordinate gives `N(μ, Σ)` with `μ = u₀ Σ̂₂₁ Σ̂₁₁⁻¹` and `Σ`
//! the Schur complement of `Σ̂₂₂`; by the block-inverse identity the
//! conditioned precision `A = Σ⁻¹` equals the trailing block of `Â`.
//!
//! σ₂ scales the field: the conditional law is `N(μ, σ₂²Σ)` and the
//! exchange algorithm works with the unnormalized
//! `log h(u, σ₂) = −(u−μ)ᵀA(u−μ)/(2σ₂²)`, whose normalizer is
//! `Z₀(σ₂) = (2π)^{n/2} σ₂ⁿ det(Σ)^{1/2}`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `(1/τ²)·tridiag(−1, 2, −1)` of size `(n+1)×(n+1)`, the precision of the
/// unconditioned field (discrete Dirichlet Laplacian stencil).
pub fn build_precision(n: usize, tau: f64) -> DMatrix<f64> {
    let dim = n + 1;
    let s = 1.0 / (tau * tau);
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            2.0 * s
        } else if i.abs_diff(j) == 1 {
            -s
        } else {
            0.0
        }
    })
}

/// Conditioned Gaussian prior for `u_1..u_n` given `u_0`.
#[derive(Debug, Clone)]
pub struct GmrfConditional {
    n: usize,
    u0: f64,
    /// Conditioned precision A = Σ⁻¹ (equals the trailing block of Â).
    precision: DMatrix<f64>,
    /// Schur-complement covariance Σ.
    covariance: DMatrix<f64>,
    /// μ = u₀ · mu_base.
    mu_base: DVector<f64>,
    mean: DVector<f64>,
    /// Cached lower-triangular Cholesky factor of Σ.
    chol: DMatrix<f64>,
    log_sqrt_det_cov: f64,
}

impl GmrfConditional {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mu_base(&self) -> &DVector<f64> {
        &self.mu_base
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }
}

/// Conditions the GMRF with precision `a_hat` on a known first coordinate.
pub fn condition_on_first(a_hat: &DMatrix<f64>, u0: f64) -> Result<GmrfConditional> {
    let dim = a_hat.nrows();
    if dim < 2 || a_hat.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "precision must be square with dim >= 2, got {dim}x{}",
            a_hat.ncols()
        )));
    }
    let n = dim - 1;
    let chol_hat = Cholesky::new(a_hat.clone())
        .ok_or_else(|| Error::InvalidInput("precision matrix is not positive definite".into()))?;
    let sigma_hat = chol_hat.inverse();

    let s11 = sigma_hat[(0, 0)];
    let s21 = sigma_hat.view((1, 0), (n, 1)).into_owned();
    let s22 = sigma_hat.view((1, 1), (n, n)).into_owned();

    let mu_base = DVector::from_iterator(n, s21.iter().map(|v| v / s11));
    let covariance = &s22 - &s21 * s21.transpose() / s11;

    let chol_cov = Cholesky::new(covariance.clone())
        .ok_or_else(|| Error::Numerical("Schur complement is not positive definite".into()))?;
    let precision = chol_cov.inverse();
    let chol = chol_cov.l();
    let log_sqrt_det_cov = chol.diagonal().iter().map(|v| v.ln()).sum();
    let mean = &mu_base * u0;

    Ok(GmrfConditional {
        n,
        u0,
        precision,
        covariance,
        mu_base,
        mean,
        chol,
        log_sqrt_det_cov,
    })
}

/// Log of the unnormalized conditional density,
/// `−(u−μ)ᵀA(u−μ)/(2σ₂²)`.
pub fn log_h(u: &DVector<f64>, sigma2: f64, gmrf: &GmrfConditional) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    let d = u - &gmrf.mean;
    let quad = (d.transpose() * &gmrf.precision * &d)[(0, 0)];
    Ok(-quad / (2.0 * sigma2 * sigma2))
}

/// Log of the Gaussian normalizer `Z₀(σ₂) = (2π)^{n/2} σ₂ⁿ det(Σ)^{1/2}`,
/// so that `exp(log_h − log_Z0)` integrates to one.
pub fn normalizer_log_z0(sigma2: f64, gmrf: &GmrfConditional) -> f64 {
    let n = gmrf.n as f64;
    n / 2.0 * (2.0 * std::f64::consts::PI).ln() + n * sigma2.ln() + gmrf.log_sqrt_det_cov
}

/// Draws `u ~ N(μ, σ₂²Σ)` via the cached Cholesky factor.
pub fn sample_conditional<R: Rng + ?Sized>(
    sigma2: f64,
    gmrf: &GmrfConditional,
    rng: &mut R,
) -> DVector<f64> {
    let z = DVector::from_fn(gmrf.n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &gmrf.mean + sigma2 * (&gmrf.chol * z)
}

/// Gamma hyperprior on σ₂ with shape `a` and scale `b` (mean `ab`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperPrior {
    pub a: f64,
    pub b: f64,
}

impl Default for HyperPrior {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0 }
    }
}

/// `log π(σ₂) = (a−1)log σ₂ − σ₂/b − log Γ(a) − a log b`.
pub fn log_gamma_prior(sigma2: f64, hyper: &HyperPrior) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok((hyper.a - 1.0) * sigma2.ln() - sigma2 / hyper.b - ln_gamma(hyper.a) - hyper.a * hyper.b.ln())
}
