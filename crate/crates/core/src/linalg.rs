//! Dense symmetric primitives: covariance, entrywise thresholding, guarded
//! inversion, and the smallest-eigenvalue probe.
//!
//! Conventions that the estimators depend on:
//! * `sample_covariance` divides by `n` (maximum-likelihood scaling), not
//!   `n - 1`, and centers each column by its mean.
//! * Thresholding maps equal inputs to equal outputs, so symmetry is
//!   preserved bit for bit.
//! * `invert_sym` refuses to invert anything whose smallest eigenvalue does
//!   not clear the caller's tolerance; the Cholesky inverse is re-symmetrized
//!   as `(M + M^T) / 2` before it is returned.

use crate::error::{Error, Result};
use crate::matrix::{MatrixRole, SampleMatrix, SymMatrix};

/// How the covariance threshold treats the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TvPolicy {
    /// Shrink off-diagonal entries only; the diagonal passes through. This is
    /// the default because variances carry the scale information that keeps
    /// the thresholded matrix well conditioned.
    #[default]
    OffDiagonalOnly,
    /// Shrink every entry, diagonal included.
    AllEntries,
}

impl std::fmt::Display for TvPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TvPolicy::OffDiagonalOnly => write!(f, "off-diagonal"),
            TvPolicy::AllEntries => write!(f, "all-entries"),
        }
    }
}

/// Scalar soft-threshold: moves `x` toward zero by `level`, clamping at zero.
#[inline]
fn shrink(x: f64, level: f64) -> f64 {
    if x > level {
        x - level
    } else if x < -level {
        x + level
    } else {
        0.0
    }
}

fn check_level(name: &str, level: f64) -> Result<()> {
    if !level.is_finite() || level < 0.0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be finite and non-negative, got {level}"
        )));
    }
    Ok(())
}

/// Maximum-likelihood sample covariance of one observation block:
/// `S = (1/n) * Xc^T Xc` where `Xc` is `x` with column means removed.
/// Requires at least two samples.
pub fn sample_covariance(x: &SampleMatrix) -> Result<SymMatrix> {
    let n = x.n_samples();
    let p = x.dim();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "sample covariance needs at least 2 samples, got {n} for condition '{}'",
            x.condition()
        )));
    }
    let mut centered = x.data().clone();
    for j in 0..p {
        let mean = centered.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    // Upper triangle via column dot products, mirrored, so the result is
    // symmetric without any dependence on evaluation order.
    SymMatrix::from_upper(p, MatrixRole::Covariance, |i, j| {
        centered.column(i).dot(&centered.column(j)) / n as f64
    })
}

/// Entrywise soft-threshold with parameter `lambda`, diagonal included.
pub fn soft_threshold(a: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    check_level("lambda", lambda)?;
    a.map(a.role(), |x| shrink(x, lambda))
}

/// Covariance threshold with parameter `v` under the given diagonal policy.
pub fn tv_threshold(a: &SymMatrix, v: f64, policy: TvPolicy) -> Result<SymMatrix> {
    check_level("v", v)?;
    match policy {
        TvPolicy::AllEntries => a.map(a.role(), |x| shrink(x, v)),
        TvPolicy::OffDiagonalOnly => {
            let p = a.dim();
            let mut out = a.matrix().map(|x| shrink(x, v));
            for i in 0..p {
                out[(i, i)] = a.entry(i, i);
            }
            SymMatrix::new(out, a.role())
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    a.matrix().clone().symmetric_eigenvalues().min()
}

/// Tolerance used by the estimators when they invert a thresholded
/// covariance: `1e-8` times the largest diagonal entry, floored at the
/// smallest positive double so it is always a valid tolerance.
pub fn default_min_eig_tol(a: &SymMatrix) -> f64 {
    let mut max_diag = f64::NEG_INFINITY;
    for i in 0..a.dim() {
        max_diag = max_diag.max(a.entry(i, i));
    }
    (1e-8 * max_diag).max(f64::MIN_POSITIVE)
}

fn inverse_role(role: MatrixRole) -> MatrixRole {
    match role {
        MatrixRole::Covariance => MatrixRole::Precision,
        MatrixRole::Precision => MatrixRole::Covariance,
        MatrixRole::Differential => MatrixRole::Differential,
    }
}

/// Inverts a symmetric positive definite matrix. Fails with the offending
/// eigenvalue if the smallest eigenvalue is at or below `min_eig_tol`.
pub fn invert_sym(a: &SymMatrix, min_eig_tol: f64) -> Result<SymMatrix> {
    invert_sym_checked(a, min_eig_tol).map(|(inv, _)| inv)
}

/// Like `invert_sym` but also reports the smallest eigenvalue it verified,
/// so pipelines can record it without a second eigendecomposition.
pub(crate) fn invert_sym_checked(a: &SymMatrix, min_eig_tol: f64) -> Result<(SymMatrix, f64)> {
    if !min_eig_tol.is_finite() || min_eig_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "min_eig_tol must be finite and positive, got {min_eig_tol}"
        )));
    }
    let min_eig = min_eigenvalue(a);
    if min_eig <= min_eig_tol {
        return Err(Error::NotInvertible {
            condition: None,
            min_eig,
            tol: min_eig_tol,
        });
    }
    // A positive verified smallest eigenvalue makes the factorization valid;
    // the guard below only catches pathological round-off.
    let chol = a.matrix().clone().cholesky().ok_or(Error::NotInvertible {
        condition: None,
        min_eig,
        tol: min_eig_tol,
    })?;
    let inv = SymMatrix::symmetrized(chol.inverse(), inverse_role(a.role()))?;
    Ok((inv, min_eig))
}
