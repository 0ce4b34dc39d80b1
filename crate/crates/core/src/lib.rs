//! Closed-form estimation of sparse differential networks between two
//! Gaussian graphical models.
//!
//! Given observation blocks from two conditions, the direct estimator
//! recovers the difference of the underlying precision matrices in one pass:
//! threshold each sample covariance, invert, subtract, soft-threshold. See
//! [`estimator`] for the fitting entry points, [`datagen`] for the synthetic
//! benchmark designs, and [`eval`] for edge-recovery scoring and the
//! benchmark cell runner.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod seed;

pub use error::{Error, Result};
