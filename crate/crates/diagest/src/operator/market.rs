//! Matrix Market reader for real square matrices.
//!
//! Supports the `coordinate` and `array` formats with `general` or
//! `symmetric` structure. Symmetric files store the lower triangle; they are
//! expanded to full storage on load. Coordinate files load as
//! [`SparseMatrix`], array files as [`DenseMatrix`].

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::operator::{DenseMatrix, LinearOperator, SparseMatrix};

/// A matrix loaded from a Matrix Market file.
#[derive(Debug, Clone)]
pub enum LoadedMatrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl LoadedMatrix {
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LoadedMatrix::Dense(d) => d.clone(),
            LoadedMatrix::Sparse(s) => s.to_dense(),
        }
    }
}

impl LinearOperator for LoadedMatrix {
    fn dim(&self) -> usize {
        match self {
            LoadedMatrix::Dense(d) => d.dim(),
            LoadedMatrix::Sparse(s) => s.dim(),
        }
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            LoadedMatrix::Dense(d) => d.apply(x, y),
            LoadedMatrix::Sparse(s) => s.apply(x, y),
        }
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        match self {
            LoadedMatrix::Dense(d) => d.entry(i, j),
            LoadedMatrix::Sparse(s) => s.entry(i, j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Structure {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<LoadedMatrix> {
    let file = File::open(path.as_ref())?;
    parse_matrix_market(BufReader::new(file))
}

pub fn parse_matrix_market(reader: impl BufRead) -> Result<LoadedMatrix> {
    let mut lines = reader.lines().enumerate();

    let (header_no, header) = match lines.next() {
        Some((no, line)) => (no + 1, line?),
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    let (layout, structure) = parse_header(header_no, &header)?;

    // Skip comments and blank lines before the size line.
    let (size_no, size_line) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                break (no + 1, line);
            }
            None => {
                return Err(Error::Parse {
                    line: header_no + 1,
                    msg: "missing size line".into(),
                })
            }
        }
    };

    match layout {
        Layout::Coordinate => parse_coordinate(size_no, &size_line, structure, lines),
        Layout::Array => parse_array(size_no, &size_line, structure, lines),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(Layout, Structure)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let fail = |msg: String| Error::Parse { line: line_no, msg };

    if fields.first() != Some(&"%%MatrixMarket") {
        return Err(fail("header must start with %%MatrixMarket".into()));
    }
    if fields.get(1).map(|s| s.to_ascii_lowercase()) != Some("matrix".into()) {
        return Err(fail("object must be \"matrix\"".into()));
    }
    let layout = match fields.get(2).map(|s| s.to_ascii_lowercase()).as_deref() {
        Some("coordinate") => Layout::Coordinate,
        Some("array") => Layout::Array,
        other => {
            return Err(fail(format!(
                "format must be \"coordinate\" or \"array\", got {other:?}"
            )))
        }
    };
    match fields.get(3).map(|s| s.to_ascii_lowercase()).as_deref() {
        Some("real") => {}
        other => return Err(fail(format!("field must be \"real\", got {other:?}"))),
    }
    let structure = match fields.get(4).map(|s| s.to_ascii_lowercase()).as_deref() {
        Some("general") => Structure::General,
        Some("symmetric") => Structure::Symmetric,
        other => {
            return Err(fail(format!(
                "symmetry must be \"general\" or \"symmetric\", got {other:?}"
            )))
        }
    };
    Ok((layout, structure))
}

fn parse_usize(line_no: usize, token: &str, what: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("cannot parse {what} from {token:?}"),
    })
}

fn parse_f64(line_no: usize, token: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("cannot parse value from {token:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("non-finite value {token:?}"),
        });
    }
    Ok(v)
}

fn require_square(line_no: usize, rows: usize, cols: usize) -> Result<usize> {
    if rows != cols {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("matrix must be square, got {rows}x{cols}"),
        });
    }
    if rows == 0 {
        return Err(Error::Parse {
            line: line_no,
            msg: "matrix dimension must be positive".into(),
        });
    }
    Ok(rows)
}

fn parse_coordinate(
    size_no: usize,
    size_line: &str,
    structure: Structure,
    lines: impl Iterator<Item = (usize, std::io::Result<String>)>,
) -> Result<LoadedMatrix> {
    let fields: Vec<&str> = size_line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse {
            line: size_no,
            msg: format!("expected \"rows cols nnz\", got {size_line:?}"),
        });
    }
    let rows = parse_usize(size_no, fields[0], "row count")?;
    let cols = parse_usize(size_no, fields[1], "column count")?;
    let nnz = parse_usize(size_no, fields[2], "nonzero count")?;
    let dim = require_square(size_no, rows, cols)?;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    for (no, line) in lines {
        let line_no = no + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected \"i j value\", got {trimmed:?}"),
            });
        }
        let i = parse_usize(line_no, fields[0], "row index")?;
        let j = parse_usize(line_no, fields[1], "column index")?;
        let v = parse_f64(line_no, fields[2])?;
        if i < 1 || i > dim || j < 1 || j > dim {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("index ({i}, {j}) out of range for dimension {dim}"),
            });
        }
        let (i, j) = (i - 1, j - 1);
        triplets.push((i, j, v));
        if structure == Structure::Symmetric && i != j {
            triplets.push((j, i, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse {
            line: size_no,
            msg: format!("size line declares {nnz} entries, file contains {seen}"),
        });
    }
    Ok(LoadedMatrix::Sparse(SparseMatrix::from_triplets(
        dim, &triplets,
    )?))
}

fn parse_array(
    size_no: usize,
    size_line: &str,
    structure: Structure,
    lines: impl Iterator<Item = (usize, std::io::Result<String>)>,
) -> Result<LoadedMatrix> {
    let fields: Vec<&str> = size_line.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse {
            line: size_no,
            msg: format!("expected \"rows cols\", got {size_line:?}"),
        });
    }
    let rows = parse_usize(size_no, fields[0], "row count")?;
    let cols = parse_usize(size_no, fields[1], "column count")?;
    let dim = require_square(size_no, rows, cols)?;

    // Array data is column-major; symmetric files store column-major lower
    // triangles (diagonal included).
    let expected = match structure {
        Structure::General => dim * dim,
        Structure::Symmetric => dim * (dim + 1) / 2,
    };
    let mut values: Vec<f64> = Vec::with_capacity(expected);
    let mut last_line = size_no;
    for (no, line) in lines {
        let line_no = no + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        for token in trimmed.split_whitespace() {
            values.push(parse_f64(line_no, token)?);
        }
        last_line = line_no;
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("expected {expected} values, file contains {}", values.len()),
        });
    }

    let mut data = vec![0.0; dim * dim];
    match structure {
        Structure::General => {
            let mut it = values.into_iter();
            for j in 0..dim {
                for i in 0..dim {
                    data[i * dim + j] = it.next().expect("length checked");
                }
            }
        }
        Structure::Symmetric => {
            let mut it = values.into_iter();
            for j in 0..dim {
                for i in j..dim {
                    let v = it.next().expect("length checked");
                    data[i * dim + j] = v;
                    data[j * dim + i] = v;
                }
            }
        }
    }
    Ok(LoadedMatrix::Dense(DenseMatrix::from_row_major(dim, data)?))
}
