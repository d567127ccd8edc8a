use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::probes::{ProbeStream, SubStream};

/// A row-major dense n×n matrix. Construction rejects NaN/Inf.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be positive".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "matrix entry",
            });
        }
        Ok(DenseMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        DenseMatrix::from_row_major(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        DenseMatrix { dim, data }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let dim = entries.len();
        let mut m = DenseMatrix::from_row_major(dim, vec![0.0; dim * dim])?;
        for (i, &d) in entries.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite {
                    context: "matrix entry",
                });
            }
            m.data[i * dim + i] = d;
        }
        Ok(m)
    }

    /// A matrix with i.i.d. entries uniform on [-1, 1], reproducible in
    /// `seed`. Test and fixture helper.
    pub fn random_uniform(dim: usize, seed: u64) -> Self {
        let stream = ProbeStream::new(seed);
        let mut rng: SubStream = stream.substream(0, 0);
        let data = (0..dim * dim).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        DenseMatrix { dim, data }
    }

    /// The symmetric matrix `C + C^T` for random uniform `C`; convenient
    /// for trace-estimation fixtures.
    pub fn random_symmetric(dim: usize, seed: u64) -> Self {
        let c = DenseMatrix::random_uniform(dim, seed);
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = c.data[i * dim + j] + c.data[j * dim + i];
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// A copy with the diagonal zeroed.
    pub fn off_diagonal_part(&self) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] = 0.0;
        }
        out
    }

    /// `alpha * A + beta * B`.
    pub fn linear_combination(
        alpha: f64,
        a: &DenseMatrix,
        beta: f64,
        b: &DenseMatrix,
    ) -> Result<DenseMatrix> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim,
                got: b.dim,
            });
        }
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        DenseMatrix::from_row_major(a.dim, data)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            *out = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn concurrent_safe(&self) -> bool {
        true
    }

    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        if i < self.dim && j < self.dim {
            Some(self.get(i, j))
        } else {
            None
        }
    }
}
