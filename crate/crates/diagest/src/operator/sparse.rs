use crate::error::{Error, Result};
use crate::operator::{DenseMatrix, LinearOperator};

/// An n×n matrix in compressed sparse row storage.
///
/// Within each row the column indices are strictly increasing; duplicate
/// triplets are summed during construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds CSR storage from `(row, col, value)` triplets in any order.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be positive".into(),
            ));
        }
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::InvalidParameter(format!(
                    "index ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "matrix entry",
                });
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut row_counts = vec![0usize; dim];
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_counts[i] += 1;
                last = Some((i, j));
            }
        }
        let mut row_offsets = vec![0usize; dim + 1];
        for r in 0..dim {
            row_offsets[r + 1] = row_offsets[r] + row_counts[r];
        }
        let m = SparseMatrix {
            dim,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds CSR storage directly; validates the structural invariants.
    pub fn from_csr(
        dim: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = SparseMatrix {
            dim,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Sparsifies a dense matrix, keeping entries with |a| >= threshold.
    pub fn from_dense(a: &DenseMatrix, threshold: f64) -> Self {
        let dim = a.dim();
        let mut row_offsets = Vec::with_capacity(dim + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = a.get(i, j);
                if v.abs() >= threshold {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            dim,
            row_offsets,
            col_indices,
            values,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.dim + 1
            || self.row_offsets[0] != 0
            || *self.row_offsets.last().unwrap() != self.col_indices.len()
            || self.col_indices.len() != self.values.len()
        {
            return Err(Error::InvalidParameter("inconsistent CSR structure".into()));
        }
        for r in 0..self.dim {
            let (start, end) = (self.row_offsets[r], self.row_offsets[r + 1]);
            if start > end {
                return Err(Error::InvalidParameter(format!(
                    "row offsets not monotone at row {r}"
                )));
            }
            let cols = &self.col_indices[start..end];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidParameter(format!(
                        "column indices not strictly increasing in row {r}"
                    )));
                }
            }
            if cols.last().is_some_and(|&c| c >= self.dim) {
                return Err(Error::InvalidParameter(format!(
                    "column index out of range in row {r}"
                )));
            }
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "matrix entry",
            });
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut rows = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in rows.iter_mut().enumerate() {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                row[self.col_indices[k]] = self.values[k];
            }
        }
        DenseMatrix::from_rows(&rows).expect("validated CSR entries are finite")
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *out = acc;
        }
    }

    fn concurrent_safe(&self) -> bool {
        true
    }

    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.dim || j >= self.dim {
            return None;
        }
        let cols = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => Some(self.values[self.row_offsets[i] + k]),
            Err(_) => Some(0.0),
        }
    }
}
