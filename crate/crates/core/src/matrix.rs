//! Validated matrix containers.
//!
//! `SampleMatrix` holds one condition's observation block (rows are samples).
//! `SymMatrix` holds a square symmetric matrix and guarantees the symmetry
//! bitwise: every constructor either verifies `a[(i,j)] == a[(j,i)]` exactly
//! or builds the matrix from one triangle so the equality holds by
//! construction. Downstream code relies on this to keep estimates symmetric
//! without re-symmetrizing after every step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which experimental condition a data block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Control / background condition.
    C,
    /// Disease / foreground condition.
    D,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::C => write!(f, "c"),
            Condition::D => write!(f, "d"),
        }
    }
}

/// What a symmetric matrix represents. Purely descriptive metadata; it does
/// not change numeric behavior but keeps pipeline code self-documenting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Covariance,
    Precision,
    Differential,
}

/// An n-by-p block of observations from one condition.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
    condition: Condition,
}

impl SampleMatrix {
    /// Wraps an observation block. Requires at least one row and one column
    /// and finite entries.
    pub fn new(data: DMatrix<f64>, condition: Condition) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "sample matrix for condition '{condition}' must be non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        check_finite(&data, &format!("sample matrix for condition '{condition}'"))?;
        Ok(Self { data, condition })
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    /// Number of variables (columns).
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// A square matrix with bitwise-exact symmetry and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
    role: MatrixRole,
}

impl SymMatrix {
    /// Wraps a matrix that is already exactly symmetric.
    pub fn new(entries: DMatrix<f64>, role: MatrixRole) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_finite(&entries, "symmetric matrix")?;
        for i in 0..entries.nrows() {
            for j in (i + 1)..entries.ncols() {
                // Bitwise comparison on purpose: callers that built both
                // triangles independently must have matched them exactly.
                if entries[(i, j)].to_bits() != entries[(j, i)].to_bits() {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        entries[(i, j)],
                        entries[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { entries, role })
    }

    /// Builds a symmetric matrix from a possibly asymmetric one by averaging
    /// with its transpose. `(a + a^T) / 2` is commutative entrywise, so the
    /// two triangles come out bit-identical.
    pub fn symmetrized(entries: DMatrix<f64>, role: MatrixRole) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let p = entries.nrows();
        let mut sym = DMatrix::zeros(p, p);
        for i in 0..p {
            sym[(i, i)] = entries[(i, i)];
            for j in (i + 1)..p {
                let v = (entries[(i, j)] + entries[(j, i)]) / 2.0;
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }
        check_finite(&sym, "symmetric matrix")?;
        Ok(Self { entries: sym, role })
    }

    /// Builds a p-by-p symmetric matrix from a function of the upper
    /// triangle: `f(i, j)` is called once per pair with `i <= j` and the
    /// value is mirrored.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(
        p: usize,
        role: MatrixRole,
        mut f: F,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput(
                "symmetric matrix must be non-empty".into(),
            ));
        }
        let mut entries = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        check_finite(&entries, "symmetric matrix")?;
        Ok(Self { entries, role })
    }

    pub fn zeros(p: usize, role: MatrixRole) -> Self {
        Self {
            entries: DMatrix::zeros(p, p),
            role,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Applies `f` to every entry. Symmetry survives because equal inputs map
    /// to equal outputs.
    pub fn map<F: Fn(f64) -> f64>(&self, role: MatrixRole, f: F) -> Result<Self> {
        let mapped = self.entries.map(f);
        check_finite(&mapped, "mapped symmetric matrix")?;
        Ok(Self {
            entries: mapped,
            role,
        })
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &SymMatrix, role: MatrixRole) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{0} from {1}x{1}",
                other.dim(),
                self.dim()
            )));
        }
        Ok(Self {
            entries: &self.entries - &other.entries,
            role,
        })
    }

    /// Returns `self + c * I` without changing the role.
    pub fn add_scaled_identity(&self, c: f64) -> Result<Self> {
        let mut entries = self.entries.clone();
        for i in 0..self.dim() {
            entries[(i, i)] += c;
        }
        check_finite(&entries, "shifted symmetric matrix")?;
        Ok(Self {
            entries,
            role: self.role,
        })
    }

    /// Count of strictly nonzero off-diagonal entries (both triangles).
    pub fn offdiag_support_size(&self) -> usize {
        let p = self.dim();
        let mut count = 0;
        for i in 0..p {
            for j in 0..p {
                if i != j && self.entries[(i, j)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Largest absolute entry over the whole matrix.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{what} has non-finite entry {} at ({i},{j})",
                    m[(i, j)]
                )));
            }
        }
    }
    Ok(())
}
