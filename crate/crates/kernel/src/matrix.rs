use crate::error::KernelError;

/// Threshold below which a row norm is considered degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Dense row-major matrix of `f64` values.
///
/// Values are immutable once returned from a public operation; all
/// operations produce new matrices. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from a flat row-major buffer. Fails on length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, KernelError> {
        if data.len() != rows * cols {
            return Err(KernelError::ShapeMismatch {
                op: "from_vec",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite {
                context: "matrix construction",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(KernelError::ShapeMismatch {
                op: "from_rows",
                lhs: (r, c),
                rhs: (r, rows.iter().map(Vec::len).max().unwrap_or(0)),
            });
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_vec(r, c, data)
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert!(i < self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        debug_assert!(i < self.rows);
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Gather the given rows into a new matrix.
    pub fn take_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len(), self.cols);
        for (k, &i) in indices.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(i));
        }
        out
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Self, KernelError> {
        if self.rows != other.rows {
            return Err(KernelError::ShapeMismatch {
                op: "hstack",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            out.row_mut(i)[self.cols..].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    /// Columns `[lo, hi)` as a new matrix.
    pub fn slice_cols(&self, lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi && hi <= self.cols);
        let mut out = Self::zeros(self.rows, hi - lo);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[lo..hi]);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &Matrix) -> Result<Self, KernelError> {
        if self.cols != other.rows {
            return Err(KernelError::ShapeMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let lhs_row = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(lhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * other^T` without materializing the transpose.
    pub fn matmul_nt(&self, other: &Matrix) -> Result<Self, KernelError> {
        if self.cols != other.cols {
            return Err(KernelError::ShapeMismatch {
                op: "matmul_nt",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                out.data[i * other.rows + j] = dot(a, b);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Self, KernelError> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self, KernelError> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// Element-wise product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Self, KernelError> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, KernelError> {
        if self.shape() != other.shape() {
            return Err(KernelError::ShapeMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Scale every row to unit Euclidean norm.
    ///
    /// A row with norm below [`DEGENERATE_NORM`] is rejected.
    pub fn normalize_rows(&self) -> Result<Self, KernelError> {
        let mut out = self.clone();
        for i in 0..self.rows {
            let norm = dot(self.row(i), self.row(i)).sqrt();
            if norm < DEGENERATE_NORM {
                return Err(KernelError::DegenerateRow { row: i, norm });
            }
            for v in out.row_mut(i) {
                *v /= norm;
            }
        }
        Ok(out)
    }

    /// Row-wise softmax with max-subtraction for stability.
    pub fn softmax_rows(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            let row = out.row_mut(i);
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        out
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity_leaves_matrix_unchanged() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let i = Matrix::identity(2);
        assert_eq!(i.matmul(&m).unwrap(), m);
    }

    #[test]
    fn matmul_hand_example() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_zero_matrix() {
        let z = Matrix::zeros(2, 2);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let c = z.matmul(&m).unwrap();
        assert!(c.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(
            a.matmul(&b),
            Err(KernelError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn matmul_nt_matches_explicit_transpose() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![7.0, 8.0, 9.0], vec![1.0, 0.5, 2.0]]).unwrap();
        assert_eq!(a.matmul_nt(&b).unwrap(), a.matmul(&b.transpose()).unwrap());
    }

    #[test]
    fn normalize_rows_three_four_five() {
        let m = Matrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let n = m.normalize_rows().unwrap();
        assert!((n.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((n.get(0, 1) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_rows_unit_row_unchanged() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.normalize_rows().unwrap(), m);
    }

    #[test]
    fn normalize_rows_zero_row_is_error() {
        let m = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            m.normalize_rows(),
            Err(KernelError::DegenerateRow { row: 0, .. })
        ));
    }

    #[test]
    fn normalize_rows_idempotent() {
        let m = Matrix::from_rows(&[vec![0.3, -1.7, 2.2], vec![5.0, 0.01, -3.0]]).unwrap();
        let once = m.normalize_rows().unwrap();
        let twice = once.normalize_rows().unwrap();
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_rows_symmetric() {
        let m = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let s = m.softmax_rows();
        assert_eq!(s.data(), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_rows_scalar_value() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let s = m.softmax_rows();
        assert!((s.get(0, 0) - 0.7310585786300049).abs() < 1e-12);
        assert!((s.get(0, 1) - 0.2689414213699951).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_large_logits_stable() {
        let m = Matrix::from_rows(&[vec![1000.0, 0.0]]).unwrap();
        let s = m.softmax_rows();
        assert!(s.data().iter().all(|v| v.is_finite()));
        assert!(s.get(0, 0) > 1.0 - 1e-12);
        assert!(s.get(0, 1) < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one_up_to_1e3_magnitude() {
        let m = Matrix::from_rows(&[
            vec![1e3, -1e3, 0.0, 500.0],
            vec![-999.0, 999.0, 1.0, -1.0],
        ])
        .unwrap();
        let s = m.softmax_rows();
        for sum in s.row_sums() {
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(matches!(
            Matrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(KernelError::NonFinite { .. })
        ));
    }

    #[test]
    fn hstack_and_slice_cols_roundtrip() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        let c = a.hstack(&b).unwrap();
        assert_eq!(c.shape(), (2, 3));
        assert_eq!(c.slice_cols(0, 2), a);
        assert_eq!(c.slice_cols(2, 3), b);
    }
}
