//! Row-major dense matrices. Row vectors are 1xN matrices; there is no
//! separate vector type.

use super::{NnError, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Matrix<S> {
        Matrix {
            rows,
            cols,
            data: vec![S::ZERO; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: S) -> Matrix<S> {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Matrix<S>, NnError> {
        if data.len() != rows * cols {
            return Err(NnError::ShapeMismatch {
                op: "from_vec",
                detail: format!("{rows}x{cols} needs {} values, got {}", rows * cols, data.len()),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Matrix<S>, NnError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(NnError::ShapeMismatch {
                    op: "from_rows",
                    detail: "ragged rows".to_string(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Matrix<S> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::ONE);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &Matrix<S>) -> Result<Matrix<S>, NnError> {
        self.check_same_shape("add", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add_assign(&mut self, other: &Matrix<S>) -> Result<(), NnError> {
        self.check_same_shape("add_assign", other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, c: S) -> Matrix<S> {
        self.map(|v| v * c)
    }

    /// `self (n x k) * other (k x m)`.
    pub fn matmul(&self, other: &Matrix<S>) -> Result<Matrix<S>, NnError> {
        if self.cols != other.rows {
            return Err(NnError::ShapeMismatch {
                op: "matmul",
                detail: format!("{:?} * {:?}", self.shape(), other.shape()),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T (k x n)^T * other (n x m)`, i.e. self is n x k.
    pub fn matmul_tn(&self, other: &Matrix<S>) -> Result<Matrix<S>, NnError> {
        if self.rows != other.rows {
            return Err(NnError::ShapeMismatch {
                op: "matmul_tn",
                detail: format!("{:?}^T * {:?}", self.shape(), other.shape()),
            });
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for n in 0..self.rows {
            let a_row = self.row(n);
            let b_row = other.row(n);
            for (k, &a) in a_row.iter().enumerate() {
                let out_row = &mut out.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self (n x k) * other^T (m x k)^T`.
    pub fn matmul_nt(&self, other: &Matrix<S>) -> Result<Matrix<S>, NnError> {
        if self.cols != other.cols {
            return Err(NnError::ShapeMismatch {
                op: "matmul_nt",
                detail: format!("{:?} * {:?}^T", self.shape(), other.shape()),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..other.rows {
                let b_row = other.row(j);
                let mut acc = S::ZERO;
                for (&a, &b) in a_row.iter().zip(b_row) {
                    acc += a * b;
                }
                out.data[i * other.rows + j] = acc;
            }
        }
        Ok(out)
    }

    /// Converts element precision (f32 <-> f64) via f64.
    pub fn convert<T: Scalar>(&self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| T::from_f64(v.to_f64())).collect(),
        }
    }

    fn check_same_shape(&self, op: &'static str, other: &Matrix<S>) -> Result<(), NnError> {
        if self.shape() != other.shape() {
            return Err(NnError::ShapeMismatch {
                op,
                detail: format!("{:?} vs {:?}", self.shape(), other.shape()),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_against_scalar_loops() {
        // 3x2 * 2x2 checked against an independent triple loop.
        let a = Matrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Matrix::from_vec(2, 2, vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let c = a.matmul(&b).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let mut want = 0.0;
                for k in 0..2 {
                    want += a.get(i, k) * b.get(k, j);
                }
                assert!((c.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transposed_products_agree_with_explicit_transpose() {
        let mut rng = crate::rng::SplitMix64::new(5);
        let a = Matrix::from_vec(4, 3, (0..12).map(|_| rng.next_range_f64(-1.0, 1.0)).collect()).unwrap();
        let b = Matrix::from_vec(4, 2, (0..8).map(|_| rng.next_range_f64(-1.0, 1.0)).collect()).unwrap();
        let tn = a.matmul_tn(&b).unwrap(); // (3x4)*(4x2)
        let mut at = Matrix::zeros(3, 4);
        for i in 0..4 {
            for j in 0..3 {
                at.set(j, i, a.get(i, j));
            }
        }
        assert_eq!(tn, at.matmul(&b).unwrap());

        let c = Matrix::from_vec(2, 3, (0..6).map(|_| rng.next_range_f64(-1.0, 1.0)).collect()).unwrap();
        let nt = a.matmul_nt(&c).unwrap(); // (4x3)*(3x2)
        let mut ct = Matrix::zeros(3, 2);
        for i in 0..2 {
            for j in 0..3 {
                ct.set(j, i, c.get(i, j));
            }
        }
        assert_eq!(nt, a.matmul(&ct).unwrap());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Matrix::<f32>::zeros(2, 3);
        let b = Matrix::<f32>::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(NnError::ShapeMismatch { .. })));
        assert!(Matrix::<f32>::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn conversion_round_trip() {
        let a = Matrix::from_vec(1, 3, vec![1.5f32, -2.25, 0.125]).unwrap();
        let b: Matrix<f64> = a.convert();
        let c: Matrix<f32> = b.convert();
        assert_eq!(a, c);
    }
}
