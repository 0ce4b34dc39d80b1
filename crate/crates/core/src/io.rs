//! Reading and writing dense matrices as headerless comma-separated text:
//! one row per line, values formatted with Rust's shortest round-trip float
//! notation, so write-then-read reproduces every entry bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Condition, MatrixRole, SampleMatrix, SymMatrix};

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.write_all(b",").map_err(wrap)?;
            }
            write!(out, "{}", m[(i, j)]).map_err(wrap)?;
        }
        out.write_all(b"\n").map_err(wrap)?;
    }
    out.flush().map_err(wrap)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |detail: String| Error::MalformedMatrix {
        path: path.to_path_buf(),
        detail,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            return Err(malformed(format!("row {} is empty", lineno + 1)));
        }
        let mut row = Vec::with_capacity(width.max(1));
        for (col, field) in line.split(',').enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                malformed(format!(
                    "row {}, field {}: cannot parse {:?} as a number",
                    lineno + 1,
                    col + 1,
                    field
                ))
            })?;
            row.push(value);
        }
        if rows.is_empty() {
            width = row.len();
        } else if row.len() != width {
            return Err(malformed(format!(
                "row {} has {} fields, expected {width}",
                lineno + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(malformed("file contains no rows".into()));
    }
    let nrows = rows.len();
    Ok(DMatrix::from_fn(nrows, width, |i, j| rows[i][j]))
}

pub fn read_sample_matrix(path: &Path, condition: Condition) -> Result<SampleMatrix> {
    SampleMatrix::new(read_matrix(path)?, condition)
}

pub fn read_sym_matrix(path: &Path, role: MatrixRole) -> Result<SymMatrix> {
    SymMatrix::new(read_matrix(path)?, role)
}

pub fn write_sym_matrix(path: &Path, m: &SymMatrix) -> Result<()> {
    write_matrix(path, m.matrix())
}

pub fn write_sample_matrix(path: &Path, m: &SampleMatrix) -> Result<()> {
    write_matrix(path, m.data())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(
            2,
            3,
            &[
                1.0 / 3.0,
                -0.0,
                1e-300,
                f64::MAX,
                -2.5e-17,
                0.1 + 0.2,
            ],
        );
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.nrows(), 2);
        assert_eq!(back.ncols(), 3);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(back[(i, j)].to_bits(), m[(i, j)].to_bits());
            }
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2\n3\n").unwrap();
        match read_matrix(&path) {
            Err(Error::MalformedMatrix { detail, .. }) => {
                assert!(detail.contains("row 2"), "{detail}");
            }
            other => panic!("expected MalformedMatrix, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,x\n").unwrap();
        assert!(read_matrix(&path).is_err());
    }

    #[test]
    fn empty_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(read_matrix(&path).is_err());
    }

    #[test]
    fn missing_files_surface_the_path() {
        let err = read_matrix(Path::new("/nonexistent/m.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/m.csv"));
    }
}
