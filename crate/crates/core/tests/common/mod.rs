//! Shared helpers for the integration suites: hand-rolled numeric oracles
//! that deliberately avoid the library's own linear algebra paths, plus
//! small random-input builders.
#![allow(dead_code)]

use diffee::matrix::{Condition, MatrixRole, SampleMatrix, SymMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps. Quadratic
/// convergence makes a fixed sweep budget plenty for the small matrices the
/// oracle checks use.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let p = a.nrows();
    assert_eq!(p, a.ncols(), "jacobi oracle needs a square matrix");
    let mut m = a.clone();
    for _ in 0..100 {
        let mut off = 0.0f64;
        for i in 0..p {
            for j in (i + 1)..p {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let apq = m[(i, j)];
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (m[(j, j)] - m[(i, i)]) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let aik = m[(i, k)];
                    let ajk = m[(j, k)];
                    m[(i, k)] = c * aik - s * ajk;
                    m[(j, k)] = s * aik + c * ajk;
                }
                for k in 0..p {
                    let aki = m[(k, i)];
                    let akj = m[(k, j)];
                    m[(k, i)] = c * aki - s * akj;
                    m[(k, j)] = s * aki + c * akj;
                }
            }
        }
    }
    (0..p).map(|i| m[(i, i)]).collect()
}

/// Element-wise double-loop covariance with the 1/n divisor, written without
/// any matrix products so it cannot share a bug with the library path.
pub fn brute_force_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let mut mean = vec![0.0f64; p];
    for j in 0..p {
        for i in 0..n {
            mean[j] += x[(i, j)];
        }
        mean[j] /= n as f64;
    }
    let mut out = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x[(i, a)] - mean[a]) * (x[(i, b)] - mean[b]);
            }
            out[(a, b)] = acc / n as f64;
        }
    }
    out
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

/// Random symmetric matrix with entries uniform in [-1, 1].
pub fn rand_sym(p: usize, rng: &mut ChaCha20Rng) -> SymMatrix {
    let mut upper = vec![0.0f64; p * p];
    for i in 0..p {
        for j in i..p {
            upper[i * p + j] = rng.gen_range(-1.0..1.0);
        }
    }
    SymMatrix::from_upper(p, MatrixRole::Covariance, |i, j| upper[i * p + j]).unwrap()
}

/// Random well-conditioned covariance: a Gram matrix of 3p noise samples
/// plus a half-unit ridge, assembled entry by entry so it is exactly
/// symmetric.
pub fn rand_spd_cov(p: usize, rng: &mut ChaCha20Rng) -> SymMatrix {
    let n = 3 * p;
    let x = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    SymMatrix::from_upper(p, MatrixRole::Covariance, |i, j| {
        let gram = x.column(i).dot(&x.column(j)) / n as f64;
        if i == j {
            gram + 0.5
        } else {
            gram
        }
    })
    .unwrap()
}

pub fn rand_samples(p: usize, n: usize, condition: Condition, rng: &mut ChaCha20Rng) -> SampleMatrix {
    let data = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    SampleMatrix::new(data, condition).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Matrix norms over all entries, diagonal included, matching how the error
/// bounds count them.
pub fn linf_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

pub fn frobenius_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

pub fn l1_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|&x| x.abs()).sum()
}
