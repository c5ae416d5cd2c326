//! Per-iteration kernels: singular value thresholding and the regularized
//! least-squares core updates of both ADMM models.
//!
//! Both core updates minimize a quadratic in the mode-2 unfolding `G` of core
//! `n`. With `S = Δ_2(G_{≠n})` (so that `Δ_n(Z) = G Sᵀ`) the normal equations
//! read `G (λ SᵀS + c μ I) = λ Δ_n(X) S + (proximal targets)`, where `c` is the
//! number of proximal terms pulling on the core: 3 for the overlapped model,
//! 1 for the latent model.

use nalgebra::linalg::{Cholesky, SVD};

use crate::error::{Error, Result};
use crate::ring::TrCores;
use crate::tensor::{fold, DenseTensor, MatricizationKind, Matrix};

/// Output of [`svt`].
#[derive(Debug, Clone)]
pub struct SvtResult {
    pub matrix: Matrix,
    /// Σ max(σ_i − β, 0)
    pub nuclear_norm_after: f64,
    /// Number of singular values that survive the threshold.
    pub effective_rank: usize,
}

/// Singular value thresholding `U max(S − βI, 0) Vᵀ`, the proximal operator of
/// `β‖·‖_*`.
pub fn svt(a: &Matrix, beta: f64) -> Result<SvtResult> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidConfig(format!("threshold {beta} must be >= 0")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailure("input contains non-finite entries".into()));
    }
    if a.is_empty() {
        return Ok(SvtResult {
            matrix: a.clone(),
            nuclear_norm_after: 0.0,
            effective_rank: 0,
        });
    }
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::SvdFailure("iteration did not converge".into()))?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SvdFailure("singular vectors missing".into())),
    };
    let shrunk = svd.singular_values.map(|s| (s - beta).max(0.0));
    let effective_rank = shrunk.iter().filter(|&&s| s > 0.0).count();
    let nuclear_norm_after = shrunk.sum();
    let mut scaled_u = u;
    for (mut col, &s) in scaled_u.column_iter_mut().zip(shrunk.iter()) {
        col *= s;
    }
    Ok(SvtResult {
        matrix: scaled_u * v_t,
        nuclear_norm_after,
        effective_rank,
    })
}

/// Applies [`svt`] to the mode-`mode` unfolding of `t` and folds back.
pub fn svt_unfolding(t: &DenseTensor, mode: usize, beta: f64) -> Result<DenseTensor> {
    let kind = MatricizationKind::Gamma(mode);
    let out = svt(&t.unfold(kind)?, beta)?;
    fold(&out.matrix, kind, t.shape())
}

pub fn nuclear_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().sum()
}

/// Solves `X A = B` for symmetric positive definite `A` by Cholesky.
pub fn ridge_solve(b: &Matrix, a: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch {
            left: vec![b.nrows(), b.ncols()],
            right: vec![a.nrows(), a.ncols()],
        });
    }
    let scale = a.amax();
    let asym = (a - a.transpose()).amax();
    if !scale.is_finite() || asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveDefinite);
    }
    let sym = (a + a.transpose()) * 0.5;
    let chol = Cholesky::new(sym).ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(&b.transpose()).transpose())
}

/// `(Δ_n(X) S, SᵀS)` with `S = Δ_2(G_{≠n})`.
fn normal_terms(x: &DenseTensor, cores: &TrCores, n: usize) -> Result<(Matrix, Matrix)> {
    let s = cores.subchain_unfolding(n)?;
    let xn = x.delta_unfold(n)?;
    if xn.ncols() != s.nrows() {
        return Err(Error::ShapeMismatch {
            left: x.shape().to_vec(),
            right: cores.extents(),
        });
    }
    Ok((xn * &s, s.tr_mul(&s)))
}

fn check_companions(core: &DenseTensor, others: &[&DenseTensor]) -> Result<()> {
    others.iter().try_for_each(|t| core.ensure_same_shape(t))
}

/// Minimizer over core `n` of
/// `Σ_i μ/2 ‖M_i − G + Y_i/μ‖² + λ/2 ‖X − Z(G)‖²`.
pub fn core_update_olrf(
    x: &DenseTensor,
    cores: &TrCores,
    aux: &[DenseTensor; 3],
    multipliers: &[DenseTensor; 3],
    n: usize,
    lambda: f64,
    mu: f64,
) -> Result<DenseTensor> {
    let core = cores.core(n);
    check_companions(core, &[&aux[0], &aux[1], &aux[2]])?;
    check_companions(core, &[&multipliers[0], &multipliers[1], &multipliers[2]])?;
    let (xs, gram) = normal_terms(x, cores, n)?;
    let mut rhs = xs * lambda;
    for (m, y) in aux.iter().zip(multipliers) {
        rhs += m.gamma_unfold(1)? * mu + y.gamma_unfold(1)?;
    }
    let lhs = gram * lambda + Matrix::identity(rhs.ncols(), rhs.ncols()) * (3.0 * mu);
    let g = ridge_solve(&rhs, &lhs)?;
    fold(&g, MatricizationKind::Gamma(1), core.shape())
}

/// Minimizer over core `n` of
/// `μ/2 ‖Σ_i W_i − G + Y/μ‖² + λ/2 ‖X − Z(G)‖²`.
pub fn core_update_llrf(
    x: &DenseTensor,
    cores: &TrCores,
    latent: &[DenseTensor; 3],
    multiplier: &DenseTensor,
    n: usize,
    lambda: f64,
    mu: f64,
) -> Result<DenseTensor> {
    let core = cores.core(n);
    check_companions(core, &[&latent[0], &latent[1], &latent[2], multiplier])?;
    let (xs, gram) = normal_terms(x, cores, n)?;
    let mut rhs = xs * lambda + multiplier.gamma_unfold(1)?;
    for w in latent {
        rhs += w.gamma_unfold(1)? * mu;
    }
    let lhs = gram * lambda + Matrix::identity(rhs.ncols(), rhs.ncols()) * mu;
    let g = ridge_solve(&rhs, &lhs)?;
    fold(&g, MatricizationKind::Gamma(1), core.shape())
}

fn fit_term(x: &DenseTensor, cores: &TrCores, n: usize, candidate: &DenseTensor) -> Result<f64> {
    let mut trial = cores.clone();
    trial.set_core(n, candidate.clone())?;
    let diff = x.sub(&trial.reconstruct())?;
    Ok(diff.frobenius_norm().powi(2))
}

/// Value of the overlapped-model core sub-objective at `candidate`.
#[allow(clippy::too_many_arguments)]
pub fn olrf_core_objective(
    x: &DenseTensor,
    cores: &TrCores,
    aux: &[DenseTensor; 3],
    multipliers: &[DenseTensor; 3],
    n: usize,
    candidate: &DenseTensor,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let mut prox = 0.0;
    for (m, y) in aux.iter().zip(multipliers) {
        let r = m.sub(candidate)?.axpy(1.0 / mu, y)?;
        prox += 0.5 * mu * r.frobenius_norm().powi(2);
    }
    Ok(prox + 0.5 * lambda * fit_term(x, cores, n, candidate)?)
}

/// Value of the latent-model core sub-objective at `candidate`.
#[allow(clippy::too_many_arguments)]
pub fn llrf_core_objective(
    x: &DenseTensor,
    cores: &TrCores,
    latent: &[DenseTensor; 3],
    multiplier: &DenseTensor,
    n: usize,
    candidate: &DenseTensor,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let sum = latent[0].add(&latent[1])?.add(&latent[2])?;
    let r = sum.sub(candidate)?.axpy(1.0 / mu, multiplier)?;
    Ok(0.5 * mu * r.frobenius_norm().powi(2) + 0.5 * lambda * fit_term(x, cores, n, candidate)?)
}
