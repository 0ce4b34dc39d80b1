use std::path::PathBuf;

use crate::matrix::Condition;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition
    /// (non-finite entries, negative thresholds, out-of-range sizes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two arguments that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix failed the positive-definiteness guard before inversion.
    /// `condition` identifies which data block was at fault when known.
    #[error(
        "matrix{} is not invertible: smallest eigenvalue {min_eig:.6e} <= tolerance {tol:.6e}",
        condition_label(.condition)
    )]
    NotInvertible {
        condition: Option<Condition>,
        min_eig: f64,
        tol: f64,
    },

    /// No value in a hyperparameter grid produced invertible inputs.
    /// `best_min_eig` is the largest smallest-eigenvalue any grid value achieved.
    #[error(
        "no grid value passed the invertibility check; best smallest eigenvalue achieved was {best_min_eig:.6e}"
    )]
    SelectionFailed { best_min_eig: f64 },

    #[error("failed to read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A matrix file that exists but cannot be parsed (ragged rows,
    /// non-numeric fields, empty content).
    #[error("malformed matrix file {}: {detail}", path.display())]
    MalformedMatrix { path: PathBuf, detail: String },
}

fn condition_label(condition: &Option<Condition>) -> String {
    match condition {
        Some(c) => format!(" for condition '{c}'"),
        None => String::new(),
    }
}
