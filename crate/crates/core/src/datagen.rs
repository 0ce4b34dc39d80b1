//! Synthetic ground truth and Gaussian data generation.
//!
//! Two graph-pair designs are provided. Model 1 grows a power-law graph by
//! preferential attachment, plants the differential signal on the two
//! highest-degree nodes, and repairs definiteness with a diagonal shift.
//! Model 2 overlays two independent random graphs on a shared component and
//! shifts each diagonal past its own smallest eigenvalue with a 0.5 margin,
//! so the individual graphs are dense while their difference stays sparse.
//! The margin keeps the smallest precision eigenvalue (and with it the
//! covariance scale) well away from zero: thinner margins leave the sampled
//! covariances so ill-conditioned that the thresholded-inverse proxy map is
//! dominated by near-singular noise.
//!
//! Every randomized stage owns a labeled child stream (see `seed`), so the
//! topology draw, the edge values, and each condition's samples are
//! independent and individually reproducible.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::matrix::{Condition, MatrixRole, SampleMatrix, SymMatrix};
use crate::seed::child_seed;

/// Which synthetic design produced a ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Model1,
    Model2,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Model1 => write!(f, "1"),
            ModelKind::Model2 => write!(f, "2"),
        }
    }
}

/// Per-model construction diagnostics.
#[derive(Debug, Clone)]
pub enum ModelDetails {
    Model1 {
        /// Diagonal shift applied to both matrices to restore definiteness;
        /// zero when no repair was needed.
        pd_boost: f64,
        /// The two highest-degree nodes carrying the differential signal.
        hubs: [usize; 2],
    },
    Model2 {
        /// Diagonal shifts of the two conditions.
        delta_c: f64,
        delta_d: f64,
    },
}

/// A generated precision-matrix pair and its differential.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub omega_c: SymMatrix,
    pub omega_d: SymMatrix,
    /// `omega_d - omega_c`, computed entrywise.
    pub delta_star: SymMatrix,
    /// Strictly nonzero positions of `delta_star` as `(i, j)` with `i <= j`.
    pub support: BTreeSet<(usize, usize)>,
    /// Strictly nonzero entries of `delta_star` over the whole matrix,
    /// counting both triangles and the diagonal.
    pub k: usize,
    pub model: ModelKind,
    pub p: usize,
    pub s: f64,
    pub seed: u64,
    pub details: ModelDetails,
}

fn support_of(delta: &SymMatrix) -> (BTreeSet<(usize, usize)>, usize) {
    let p = delta.dim();
    let mut support = BTreeSet::new();
    let mut k = 0;
    for i in 0..p {
        for j in i..p {
            if delta.entry(i, j) != 0.0 {
                support.insert((i, j));
                k += if i == j { 1 } else { 2 };
            }
        }
    }
    (support, k)
}

fn check_p(p: usize) -> Result<()> {
    if p < 10 {
        return Err(Error::InvalidInput(format!(
            "generators need p >= 10, got {p}"
        )));
    }
    Ok(())
}

/// Dispatches to the requested generator.
pub fn generate(model: ModelKind, p: usize, s: f64, seed: u64) -> Result<GroundTruth> {
    match model {
        ModelKind::Model1 => gen_model1(p, s, seed),
        ModelKind::Model2 => gen_model2(p, s, seed),
    }
}

/// Hub-structured pair. `omega_d` is a power-law graph with exactly
/// `floor(s * p * (p-1) / 2)` edges, edge values drawn uniformly from
/// `[-10/p, -4/p] U [4/p, 10/p]` and unit diagonal. The differential is the
/// top 20% (by magnitude, pooled across both hubs) of the edges incident to
/// the two highest-degree nodes; `omega_c` is `omega_d` minus that signal.
/// If either matrix ends up indefinite, `(|lambda_min| + 0.01) * I` is added
/// to both, which leaves the differential untouched.
pub fn gen_model1(p: usize, s: f64, seed: u64) -> Result<GroundTruth> {
    check_p(p)?;
    if !s.is_finite() || s <= 0.0 || s > 1.0 {
        return Err(Error::InvalidInput(format!(
            "model 1 needs sparsity s in (0, 1], got {s}"
        )));
    }
    let capacity = p * (p - 1) / 2;
    let target_edges = (s * capacity as f64).floor() as usize;
    if target_edges < 1 {
        return Err(Error::InvalidInput(format!(
            "model 1 target edge count floor(s * p * (p-1) / 2) is 0 for p={p}, s={s}"
        )));
    }

    // Topology: grow by preferential attachment, then densify by
    // preferential edge insertion until exactly `target_edges` edges exist.
    // Weights are degree + 1 so isolated nodes stay reachable.
    let mut rng = ChaCha20Rng::seed_from_u64(child_seed(seed, "model1/graph"));
    let mut adjacent = vec![BTreeSet::<usize>::new(); p];
    let mut degree = vec![0u64; p];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(target_edges);
    let add_edge = |a: usize,
                        b: usize,
                        adjacent: &mut Vec<BTreeSet<usize>>,
                        degree: &mut Vec<u64>,
                        edges: &mut Vec<(usize, usize)>| {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        adjacent[i].insert(j);
        adjacent[j].insert(i);
        degree[i] += 1;
        degree[j] += 1;
        edges.push((i, j));
    };

    let attach_per_node = (target_edges / (p - 1)).max(1);
    let mut remaining = target_edges;
    for t in 1..p {
        if remaining == 0 {
            break;
        }
        let count = attach_per_node.min(t).min(remaining);
        let mut chosen = BTreeSet::new();
        while chosen.len() < count {
            let total: u64 = (0..t)
                .filter(|i| !chosen.contains(i))
                .map(|i| degree[i] + 1)
                .sum();
            let mut ticket = rng.gen_range(0..total);
            for (i, &d) in degree.iter().enumerate().take(t) {
                if chosen.contains(&i) {
                    continue;
                }
                let w = d + 1;
                if ticket < w {
                    chosen.insert(i);
                    break;
                }
                ticket -= w;
            }
        }
        for &u in &chosen {
            add_edge(u, t, &mut adjacent, &mut degree, &mut edges);
        }
        remaining -= count;
    }
    while remaining > 0 {
        let total: u64 = degree.iter().map(|&d| d + 1).sum();
        let mut ticket = rng.gen_range(0..total);
        let mut u = 0;
        for (i, &d) in degree.iter().enumerate() {
            let w = d + 1;
            if ticket < w {
                u = i;
                break;
            }
            ticket -= w;
        }
        let candidates: Vec<usize> = (0..p)
            .filter(|&v| v != u && !adjacent[u].contains(&v))
            .collect();
        if candidates.is_empty() {
            // This endpoint's row is already full; redraw.
            continue;
        }
        let ctotal: u64 = candidates.iter().map(|&v| degree[v] + 1).sum();
        let mut ticket = rng.gen_range(0..ctotal);
        let mut v = candidates[0];
        for &cand in &candidates {
            let w = degree[cand] + 1;
            if ticket < w {
                v = cand;
                break;
            }
            ticket -= w;
        }
        add_edge(u, v, &mut adjacent, &mut degree, &mut edges);
        remaining -= 1;
    }

    // Edge values: one draw per undirected edge, in canonical (i, j) order,
    // mirrored to both triangles. The two sign branches have equal length,
    // so magnitude plus fair sign is uniform over the stated union.
    edges.sort_unstable();
    let mut vrng = ChaCha20Rng::seed_from_u64(child_seed(seed, "model1/values"));
    let lo = 4.0 / p as f64;
    let hi = 10.0 / p as f64;
    let mut omega_d_entries = DMatrix::zeros(p, p);
    for i in 0..p {
        omega_d_entries[(i, i)] = 1.0;
    }
    for &(i, j) in &edges {
        let magnitude = vrng.gen_range(lo..=hi);
        let value = if vrng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
        omega_d_entries[(i, j)] = value;
        omega_d_entries[(j, i)] = value;
    }

    // Hubs: top two nodes by degree, ties broken by index.
    let mut by_degree: Vec<usize> = (0..p).collect();
    by_degree.sort_by_key(|&i| (std::cmp::Reverse(degree[i]), i));
    let hubs = [by_degree[0], by_degree[1]];

    // Differential signal: the strongest fifth (rounded up, pooled across
    // both hubs) of the edges touching either hub.
    let mut incident: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&(i, j)| hubs.contains(&i) || hubs.contains(&j))
        .collect();
    incident.sort_by(|&(ai, aj), &(bi, bj)| {
        let ma = omega_d_entries[(ai, aj)].abs();
        let mb = omega_d_entries[(bi, bj)].abs();
        mb.total_cmp(&ma).then_with(|| (ai, aj).cmp(&(bi, bj)))
    });
    let take = incident.len().div_ceil(5);
    let mut delta_entries = DMatrix::zeros(p, p);
    for &(i, j) in incident.iter().take(take) {
        delta_entries[(i, j)] = omega_d_entries[(i, j)];
        delta_entries[(j, i)] = omega_d_entries[(j, i)];
    }
    let mut omega_c_entries = &omega_d_entries - &delta_entries;

    // Definiteness repair: one shared shift keeps the differential exact.
    let eig_d = min_eigenvalue(&SymMatrix::new(omega_d_entries.clone(), MatrixRole::Precision)?);
    let eig_c = min_eigenvalue(&SymMatrix::new(omega_c_entries.clone(), MatrixRole::Precision)?);
    let worst = eig_d.min(eig_c);
    let pd_boost = if worst <= 0.0 { worst.abs() + 0.01 } else { 0.0 };
    if pd_boost > 0.0 {
        for i in 0..p {
            omega_d_entries[(i, i)] += pd_boost;
            omega_c_entries[(i, i)] += pd_boost;
        }
    }

    let omega_d = SymMatrix::new(omega_d_entries, MatrixRole::Precision)?;
    let omega_c = SymMatrix::new(omega_c_entries, MatrixRole::Precision)?;
    assert!(
        min_eigenvalue(&omega_d) > 0.0 && min_eigenvalue(&omega_c) > 0.0,
        "definiteness repair must leave both matrices positive definite"
    );
    let delta_star = SymMatrix::new(delta_entries, MatrixRole::Differential)?;
    let (support, k) = support_of(&delta_star);
    Ok(GroundTruth {
        omega_c,
        omega_d,
        delta_star,
        support,
        k,
        model: ModelKind::Model1,
        p,
        s,
        seed,
        details: ModelDetails::Model1 { pd_boost, hubs },
    })
}

/// Margin added past `-lambda_min` in the Model 2 diagonal shift. 0.5 keeps
/// the covariance spectrum within a factor of a few of unity; see the module
/// docs for why the estimator collapses when this is much smaller.
pub const MODEL2_EIG_MARGIN: f64 = 0.5;

fn bernoulli_sym(p: usize, prob: f64, seed: u64) -> Result<SymMatrix> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    SymMatrix::from_upper(p, MatrixRole::Precision, |i, j| {
        if i == j {
            0.0
        } else if rng.gen_bool(prob) {
            0.5
        } else {
            0.0
        }
    })
}

/// Dense-pair design. Each condition is `B + B_S + delta * I` where `B` has
/// independent off-diagonal entries of 0.5 with probability 0.1, `B_S` is a
/// component shared by both conditions with entry probability `0.1 * s`, and
/// `delta = max(0, -lambda_min(B + B_S)) + 0.5`. The shared component
/// cancels exactly in the differential, whose off-diagonal entries are all
/// in {-0.5, 0, 0.5}; the diagonal carries `delta_d - delta_c`.
pub fn gen_model2(p: usize, s: f64, seed: u64) -> Result<GroundTruth> {
    check_p(p)?;
    if !s.is_finite() || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!(
            "model 2 needs shared-component weight s in [0, 1], got {s}"
        )));
    }
    let b_c = bernoulli_sym(p, 0.1, child_seed(seed, "model2/bc"))?;
    let b_d = bernoulli_sym(p, 0.1, child_seed(seed, "model2/bd"))?;
    let b_s = bernoulli_sym(p, 0.1 * s, child_seed(seed, "model2/bs"))?;

    let base_c = SymMatrix::new(b_c.matrix() + b_s.matrix(), MatrixRole::Precision)?;
    let base_d = SymMatrix::new(b_d.matrix() + b_s.matrix(), MatrixRole::Precision)?;
    let delta_c = (-min_eigenvalue(&base_c)).max(0.0) + MODEL2_EIG_MARGIN;
    let delta_d = (-min_eigenvalue(&base_d)).max(0.0) + MODEL2_EIG_MARGIN;
    let omega_c = base_c.add_scaled_identity(delta_c)?;
    let omega_d = base_d.add_scaled_identity(delta_d)?;
    assert!(
        min_eigenvalue(&omega_c) > 0.0 && min_eigenvalue(&omega_d) > 0.0,
        "diagonal shifts must leave both matrices positive definite"
    );

    let delta_star = omega_d.sub(&omega_c, MatrixRole::Differential)?;
    let (support, k) = support_of(&delta_star);
    Ok(GroundTruth {
        omega_c,
        omega_d,
        delta_star,
        support,
        k,
        model: ModelKind::Model2,
        p,
        s,
        seed,
        details: ModelDetails::Model2 { delta_c, delta_d },
    })
}

/// Draws `n` rows from `N(0, omega^-1)`: standard normals mapped through the
/// Cholesky factor of the covariance, row by row, coordinate by coordinate.
pub fn mvn_sample(
    omega: &SymMatrix,
    n: usize,
    seed: u64,
    condition: Condition,
) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "mvn_sample needs at least one sample".into(),
        ));
    }
    let p = omega.dim();
    let chol_omega = omega
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("omega must be positive definite".into()))?;
    let sigma = SymMatrix::symmetrized(chol_omega.inverse(), MatrixRole::Covariance)?;
    let chol_sigma = sigma.matrix().clone().cholesky().ok_or_else(|| {
        Error::InvalidInput("covariance factorization failed; omega is near-singular".into())
    })?;
    let l = chol_sigma.l();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut z = DVector::zeros(p);
    let mut data = DMatrix::zeros(n, p);
    for i in 0..n {
        for k in 0..p {
            z[k] = rng.sample(StandardNormal);
        }
        let x = &l * &z;
        for j in 0..p {
            data[(i, j)] = x[j];
        }
    }
    SampleMatrix::new(data, condition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_difference_identity_is_exact() {
        let truth = gen_model1(30, 0.2, 42).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let lhs = truth.omega_c.entry(i, j) + truth.delta_star.entry(i, j);
                assert_eq!(lhs.to_bits(), truth.omega_d.entry(i, j).to_bits());
            }
        }
    }

    #[test]
    fn model1_hits_the_exact_edge_count() {
        let truth = gen_model1(50, 0.2, 7).unwrap();
        // floor(0.2 * 50 * 49 / 2) = 245 edges.
        assert_eq!(truth.omega_d.offdiag_support_size(), 2 * 245);
    }

    #[test]
    fn model1_signal_lives_on_the_two_hubs() {
        let truth = gen_model1(40, 0.2, 3).unwrap();
        let ModelDetails::Model1 { hubs, .. } = truth.details else {
            panic!("wrong details variant");
        };
        assert!(!truth.support.is_empty());
        for &(i, j) in &truth.support {
            assert!(i != j, "model 1 differential must be off-diagonal");
            assert!(hubs.contains(&i) || hubs.contains(&j));
        }
    }

    #[test]
    fn model1_is_positive_definite_and_deterministic() {
        let a = gen_model1(25, 0.3, 11).unwrap();
        let b = gen_model1(25, 0.3, 11).unwrap();
        assert!(min_eigenvalue(&a.omega_c) > 0.0);
        assert!(min_eigenvalue(&a.omega_d) > 0.0);
        assert_eq!(a.omega_d.matrix(), b.omega_d.matrix());
        assert_eq!(a.delta_star.matrix(), b.delta_star.matrix());
        let c = gen_model1(25, 0.3, 12).unwrap();
        assert_ne!(a.omega_d.matrix(), c.omega_d.matrix());
    }

    #[test]
    fn model1_validates_its_inputs() {
        assert!(gen_model1(9, 0.2, 0).is_err());
        assert!(gen_model1(20, 0.0, 0).is_err());
        assert!(gen_model1(20, 1.5, 0).is_err());
        // floor(0.001 * 45) = 0 edges.
        assert!(gen_model1(10, 0.001, 0).is_err());
    }

    #[test]
    fn model1_takes_a_fifth_of_hub_edges_rounded_up() {
        let truth = gen_model1(30, 0.2, 19).unwrap();
        let ModelDetails::Model1 { hubs, .. } = truth.details else {
            panic!("wrong details variant");
        };
        let mut incident = 0usize;
        for i in 0..30 {
            for j in (i + 1)..30 {
                if truth.omega_d.entry(i, j) != 0.0 && (hubs.contains(&i) || hubs.contains(&j)) {
                    incident += 1;
                }
            }
        }
        assert_eq!(truth.support.len(), incident.div_ceil(5));
    }

    #[test]
    fn model2_offdiagonal_differences_are_half_integers() {
        let truth = gen_model2(30, 0.5, 5).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                if i != j {
                    let v = truth.delta_star.entry(i, j);
                    assert!(v == 0.0 || v == 0.5 || v == -0.5, "got {v}");
                }
            }
        }
    }

    #[test]
    fn model2_shared_component_cancels_exactly() {
        // The shared component draws from its own stream, so changing only
        // `s` must leave the off-diagonal differential untouched.
        let none = gen_model2(25, 0.0, 9).unwrap();
        let full = gen_model2(25, 1.0, 9).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                if i != j {
                    assert_eq!(
                        none.delta_star.entry(i, j).to_bits(),
                        full.delta_star.entry(i, j).to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn model2_diagonal_carries_the_shift_difference() {
        let truth = gen_model2(20, 0.2, 21).unwrap();
        let ModelDetails::Model2 { delta_c, delta_d } = truth.details else {
            panic!("wrong details variant");
        };
        assert!(delta_c >= MODEL2_EIG_MARGIN && delta_d >= MODEL2_EIG_MARGIN);
        for i in 0..20 {
            assert_eq!(truth.delta_star.entry(i, i), delta_d - delta_c);
        }
    }

    #[test]
    fn model2_smallest_eigenvalues_clear_the_design_margin() {
        for seed in [0, 1, 2] {
            let truth = gen_model2(40, 0.2, seed).unwrap();
            assert!(min_eigenvalue(&truth.omega_c) >= MODEL2_EIG_MARGIN - 1e-10);
            assert!(min_eigenvalue(&truth.omega_d) >= MODEL2_EIG_MARGIN - 1e-10);
        }
    }

    #[test]
    fn model2_edge_probability_is_honored() {
        // With s = 0 the shared component vanishes, so the off-diagonal
        // support of omega_c is exactly the 0.1-probability draw.
        let mut nonzero = 0usize;
        let mut pairs = 0usize;
        for seed in 0..20 {
            let truth = gen_model2(100, 0.0, seed).unwrap();
            for i in 0..100 {
                for j in (i + 1)..100 {
                    pairs += 1;
                    if truth.omega_c.entry(i, j) != 0.0 {
                        nonzero += 1;
                    }
                }
            }
        }
        let rate = nonzero as f64 / pairs as f64;
        assert!((rate - 0.1).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn model2_is_deterministic_and_validates_inputs() {
        let a = gen_model2(15, 0.3, 2).unwrap();
        let b = gen_model2(15, 0.3, 2).unwrap();
        assert_eq!(a.omega_c.matrix(), b.omega_c.matrix());
        assert_eq!(a.omega_d.matrix(), b.omega_d.matrix());
        assert!(gen_model2(9, 0.2, 0).is_err());
        assert!(gen_model2(20, -0.1, 0).is_err());
        assert!(gen_model2(20, 1.1, 0).is_err());
    }

    #[test]
    fn mvn_is_deterministic_bit_for_bit() {
        let truth = gen_model2(12, 0.2, 3).unwrap();
        let a = mvn_sample(&truth.omega_c, 8, 99, Condition::C).unwrap();
        let b = mvn_sample(&truth.omega_c, 8, 99, Condition::C).unwrap();
        assert_eq!(a.data(), b.data());
        let c = mvn_sample(&truth.omega_c, 8, 100, Condition::C).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn mvn_identity_precision_gives_unit_variances() {
        let eye = SymMatrix::from_upper(3, MatrixRole::Precision, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let n = 100_000;
        let x = mvn_sample(&eye, n, 4, Condition::C).unwrap();
        for j in 0..3 {
            let col = x.data().column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            assert!((var - 1.0).abs() <= 0.02, "var {var}");
            assert!(mean.abs() <= 0.02, "mean {mean}");
        }
    }

    #[test]
    fn mvn_rejects_bad_inputs() {
        let truth = gen_model2(10, 0.2, 3).unwrap();
        assert!(mvn_sample(&truth.omega_c, 0, 1, Condition::C).is_err());
        let indefinite = SymMatrix::from_upper(2, MatrixRole::Precision, |i, j| {
            if i == j {
                1.0
            } else {
                2.0
            }
        })
        .unwrap();
        assert!(mvn_sample(&indefinite, 5, 1, Condition::C).is_err());
    }
}
