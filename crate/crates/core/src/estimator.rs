//! Differential network estimators.
//!
//! The direct estimator recovers the difference of two precision matrices
//! without estimating either one: threshold each sample covariance, invert,
//! subtract, and soft-threshold the difference. Everything here is a closed
//! form, so a fit is a fixed sequence of dense operations with no iterative
//! solver and no convergence tuning.
//!
//! The expensive part of a fit, the thresholded-inverse proxy, does not
//! depend on the sparsity parameter `lambda`. `diffee_path` exploits that by
//! computing the proxy once and replaying only the final soft-threshold
//! across a whole `lambda` grid.

use crate::error::{Error, Result};
use crate::linalg::{
    default_min_eig_tol, invert_sym_checked, min_eigenvalue, sample_covariance, soft_threshold,
    tv_threshold, TvPolicy,
};
use crate::matrix::{Condition, MatrixRole, SampleMatrix, SymMatrix};

/// Sparsity parameter: one value for a single fit, a grid for a path.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    Single(f64),
    Grid(Vec<f64>),
}

/// Hyperparameters for one estimator invocation.
#[derive(Debug, Clone)]
pub struct HyperParams {
    v: f64,
    lambda: LambdaSpec,
    tv_policy: TvPolicy,
}

impl HyperParams {
    /// Hyperparameters for a single fit at sparsity level `lambda`.
    pub fn single(v: f64, lambda: f64) -> Result<Self> {
        check_nonneg("lambda", lambda)?;
        Self::build(v, LambdaSpec::Single(lambda))
    }

    /// Hyperparameters for a path over an ascending, non-empty grid.
    pub fn grid(v: f64, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidInput("lambda grid must be non-empty".into()));
        }
        for &lambda in &grid {
            check_nonneg("lambda", lambda)?;
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "lambda grid must be strictly ascending".into(),
            ));
        }
        Self::build(v, LambdaSpec::Grid(grid))
    }

    fn build(v: f64, lambda: LambdaSpec) -> Result<Self> {
        check_nonneg("v", v)?;
        Ok(Self {
            v,
            lambda,
            tv_policy: TvPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: TvPolicy) -> Self {
        self.tv_policy = policy;
        self
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn lambda(&self) -> &LambdaSpec {
        &self.lambda
    }

    pub fn tv_policy(&self) -> TvPolicy {
        self.tv_policy
    }
}

fn check_nonneg(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be finite and non-negative, got {value}"
        )));
    }
    Ok(())
}

/// The lambda-independent part of a fit: the difference of thresholded
/// covariance inverses, plus the diagnostics gathered while computing it.
#[derive(Debug, Clone)]
pub struct ProxyMap {
    /// `[T_v(sigma_d)]^-1 - [T_v(sigma_c)]^-1`.
    pub map: SymMatrix,
    /// The `v` the thresholds were evaluated at.
    pub v_used: f64,
    /// Smallest eigenvalues of the two thresholded covariances `(c, d)`.
    pub min_eigs: (f64, f64),
}

/// A fitted sparse differential estimate.
#[derive(Debug, Clone)]
pub struct DiffEstimate {
    pub delta: SymMatrix,
    pub lambda: f64,
    pub v: f64,
    /// Strictly nonzero off-diagonal entries of `delta`, both triangles.
    pub support_size: usize,
}

fn annotate(err: Error, condition: Condition) -> Error {
    match err {
        Error::NotInvertible {
            condition: None,
            min_eig,
            tol,
        } => Error::NotInvertible {
            condition: Some(condition),
            min_eig,
            tol,
        },
        other => other,
    }
}

fn check_same_dim(pc: usize, pd: usize) -> Result<()> {
    if pc != pd {
        return Err(Error::DimensionMismatch(format!(
            "condition 'c' has p={pc} variables but condition 'd' has p={pd}"
        )));
    }
    Ok(())
}

/// Thresholds and inverts both sample covariances, returning the difference
/// `d - c`. Inversion failures name the condition at fault.
pub fn proxy_backward_map(
    sigma_c: &SymMatrix,
    sigma_d: &SymMatrix,
    v: f64,
    policy: TvPolicy,
) -> Result<ProxyMap> {
    check_same_dim(sigma_c.dim(), sigma_d.dim())?;
    let tc = tv_threshold(sigma_c, v, policy)?;
    let td = tv_threshold(sigma_d, v, policy)?;
    let (inv_c, eig_c) = invert_sym_checked(&tc, default_min_eig_tol(&tc))
        .map_err(|e| annotate(e, Condition::C))?;
    let (inv_d, eig_d) = invert_sym_checked(&td, default_min_eig_tol(&td))
        .map_err(|e| annotate(e, Condition::D))?;
    let map = inv_d.sub(&inv_c, MatrixRole::Differential)?;
    Ok(ProxyMap {
        map,
        v_used: v,
        min_eigs: (eig_c, eig_d),
    })
}

/// Exact difference of covariance inverses, with no thresholding. This is
/// what the proxy converges to as `v` goes to zero on invertible inputs.
pub fn exact_backward_map(sigma_c: &SymMatrix, sigma_d: &SymMatrix) -> Result<SymMatrix> {
    check_same_dim(sigma_c.dim(), sigma_d.dim())?;
    let (inv_c, _) = invert_sym_checked(sigma_c, default_min_eig_tol(sigma_c))
        .map_err(|e| annotate(e, Condition::C))?;
    let (inv_d, _) = invert_sym_checked(sigma_d, default_min_eig_tol(sigma_d))
        .map_err(|e| annotate(e, Condition::D))?;
    inv_d.sub(&inv_c, MatrixRole::Differential)
}

fn proxy_from_samples(
    xc: &SampleMatrix,
    xd: &SampleMatrix,
    v: f64,
    policy: TvPolicy,
) -> Result<ProxyMap> {
    check_same_dim(xc.dim(), xd.dim())?;
    let sigma_c = sample_covariance(xc)?;
    let sigma_d = sample_covariance(xd)?;
    proxy_backward_map(&sigma_c, &sigma_d, v, policy)
}

fn estimate_from_proxy(proxy_map: &SymMatrix, v: f64, lambda: f64) -> Result<DiffEstimate> {
    let delta = soft_threshold(proxy_map, lambda)?;
    let support_size = delta.offdiag_support_size();
    Ok(DiffEstimate {
        delta,
        lambda,
        v,
        support_size,
    })
}

/// Fits the sparse differential estimate at a single `lambda`:
/// soft-threshold of the proxy backward map, diagonal included.
pub fn diffee_fit(xc: &SampleMatrix, xd: &SampleMatrix, h: &HyperParams) -> Result<DiffEstimate> {
    let LambdaSpec::Single(lambda) = h.lambda else {
        return Err(Error::InvalidInput(
            "diffee_fit needs a single lambda; use diffee_path for a grid".into(),
        ));
    };
    let proxy = proxy_from_samples(xc, xd, h.v, h.tv_policy)?;
    estimate_from_proxy(&proxy.map, h.v, lambda)
}

/// Fits the whole `lambda` grid while computing covariances and the proxy
/// map exactly once. Element `i` is identical to a `diffee_fit` at
/// `grid[i]`, bit for bit, because both apply the same soft-threshold to the
/// same proxy.
pub fn diffee_path(
    xc: &SampleMatrix,
    xd: &SampleMatrix,
    h: &HyperParams,
) -> Result<Vec<DiffEstimate>> {
    let LambdaSpec::Grid(ref grid) = h.lambda else {
        return Err(Error::InvalidInput(
            "diffee_path needs a lambda grid; use diffee_fit for a single value".into(),
        ));
    };
    let proxy = proxy_from_samples(xc, xd, h.v, h.tv_policy)?;
    grid.iter()
        .map(|&lambda| estimate_from_proxy(&proxy.map, h.v, lambda))
        .collect()
}

/// Single-graph elementary estimator: the thresholded-covariance inverse
/// with its off-diagonal entries soft-thresholded by `lambda`. The diagonal
/// passes through untouched.
pub fn ee_sggm(x: &SampleMatrix, v: f64, lambda: f64) -> Result<SymMatrix> {
    check_nonneg("lambda", lambda)?;
    let sigma = sample_covariance(x)?;
    let t = tv_threshold(&sigma, v, TvPolicy::default())?;
    let (inv, _) = invert_sym_checked(&t, default_min_eig_tol(&t))
        .map_err(|e| annotate(e, x.condition()))?;
    tv_threshold(&inv, lambda, TvPolicy::OffDiagonalOnly)
}

/// Baseline: estimate each precision matrix separately with `ee_sggm` and
/// subtract. Unlike the direct estimator this sparsifies the individual
/// graphs, not the difference.
pub fn naive_two_step(
    xc: &SampleMatrix,
    xd: &SampleMatrix,
    v: f64,
    lambda: f64,
) -> Result<DiffEstimate> {
    check_same_dim(xc.dim(), xd.dim())?;
    let omega_c = ee_sggm(xc, v, lambda)?;
    let omega_d = ee_sggm(xd, v, lambda)?;
    let delta = omega_d.sub(&omega_c, MatrixRole::Differential)?;
    let support_size = delta.offdiag_support_size();
    Ok(DiffEstimate {
        delta,
        lambda,
        v,
        support_size,
    })
}

/// Picks the smallest `v` in `grid` whose thresholded covariances both pass
/// the invertibility guard. The grid must be non-empty, non-negative, and
/// strictly ascending. On failure, reports the best smallest-eigenvalue any
/// grid value achieved.
pub fn select_v(
    sigma_c: &SymMatrix,
    sigma_d: &SymMatrix,
    grid: &[f64],
    policy: TvPolicy,
) -> Result<f64> {
    check_same_dim(sigma_c.dim(), sigma_d.dim())?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("v grid must be non-empty".into()));
    }
    for &v in grid {
        check_nonneg("v", v)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "v grid must be strictly ascending".into(),
        ));
    }
    let mut best_min_eig = f64::NEG_INFINITY;
    for &v in grid {
        let tc = tv_threshold(sigma_c, v, policy)?;
        let td = tv_threshold(sigma_d, v, policy)?;
        let eig_c = min_eigenvalue(&tc);
        let eig_d = min_eigenvalue(&td);
        best_min_eig = best_min_eig.max(eig_c.min(eig_d));
        if eig_c > default_min_eig_tol(&tc) && eig_d > default_min_eig_tol(&td) {
            return Ok(v);
        }
    }
    Err(Error::SelectionFailed { best_min_eig })
}

/// The hyperparameter grid used throughout the benchmarks:
/// `{0.001 * i : i = 1..=1000}`.
pub fn v_grid() -> Vec<f64> {
    (1..=1000).map(|i| 0.001 * i as f64).collect()
}

/// Theoretical covariance-threshold rate `scale * sqrt(ln p / min(n_c, n_d))`,
/// offered as an alternative to the grid search of `select_v`.
pub fn theoretical_v(p: usize, n_c: usize, n_d: usize, scale: f64) -> Result<f64> {
    if p < 2 || n_c == 0 || n_d == 0 {
        return Err(Error::InvalidInput(format!(
            "theoretical v needs p >= 2 and positive sample sizes, got p={p}, n_c={n_c}, n_d={n_d}"
        )));
    }
    check_nonneg("scale", scale)?;
    let n = n_c.min(n_d) as f64;
    Ok(scale * ((p as f64).ln() / n).sqrt())
}
