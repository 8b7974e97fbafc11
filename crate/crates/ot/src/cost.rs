use otlab_kernel::{dot, norm, Matrix, DEGENERATE_NORM};

use crate::error::OtError;

/// Ground cost between feature rows.
///
/// Both variants satisfy `c >= 0` and `c(x, x) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// `c(x, y) = ||x - y||^2`
    SquaredEuclidean,
    /// `c(x, y) = 1 - <x, y> / (||x|| ||y||)`
    Cosine,
}

impl CostKind {
    pub fn slug(self) -> &'static str {
        match self {
            Self::SquaredEuclidean => "sq-euclidean",
            Self::Cosine => "cosine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sq-euclidean" | "squared-euclidean" | "l2" => Some(Self::SquaredEuclidean),
            "cosine" | "cos" => Some(Self::Cosine),
            _ => None,
        }
    }
}

fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Pairwise cost grid: entry `(i, j) = c(x_i, y_j)`.
///
/// Both feature blocks must hold the same number of rows of equal width;
/// transport here is always between equal-size empirical distributions.
pub fn cost_matrix(x: &Matrix, y: &Matrix, kind: CostKind) -> Result<Matrix, OtError> {
    if x.cols() != y.cols() || x.rows() != y.rows() {
        return Err(OtError::Shape {
            op: "cost_matrix",
            lhs: x.shape(),
            rhs: y.shape(),
        });
    }
    if x.rows() == 0 {
        return Err(OtError::Shape {
            op: "cost_matrix",
            lhs: x.shape(),
            rhs: y.shape(),
        });
    }
    let n = x.rows();
    let mut c = Matrix::zeros(n, n);
    match kind {
        CostKind::SquaredEuclidean => {
            for i in 0..n {
                for j in 0..n {
                    c.set(i, j, squared_euclidean(x.row(i), y.row(j)));
                }
            }
        }
        CostKind::Cosine => {
            let xn = row_norms(x, "x")?;
            let yn = row_norms(y, "y")?;
            for i in 0..n {
                for j in 0..n {
                    let cos = dot(x.row(i), y.row(j)) / (xn[i] * yn[j]);
                    // fp noise can push cos a hair past 1 for identical rows
                    c.set(i, j, (1.0 - cos).max(0.0));
                }
            }
        }
    }
    Ok(c)
}

fn row_norms(m: &Matrix, side: &'static str) -> Result<Vec<f64>, OtError> {
    (0..m.rows())
        .map(|i| {
            let n = norm(m.row(i));
            if n < DEGENERATE_NORM {
                Err(OtError::Degenerate { side, row: i, norm: n })
            } else {
                Ok(n)
            }
        })
        .collect()
}

/// Gradient of `c(x, y)` with respect to `x`, written into `out`.
pub(crate) fn cost_grad_x(kind: CostKind, x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) {
    match kind {
        CostKind::SquaredEuclidean => {
            for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
                *o += scale * 2.0 * (xi - yi);
            }
        }
        CostKind::Cosine => {
            let nx = norm(x);
            let ny = norm(y);
            let cos = dot(x, y) / (nx * ny);
            // d/dx [1 - cos] = -(y/||y|| - cos * x/||x||) / ||x||
            for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
                *o += scale * (-(yi / ny - cos * xi / nx) / nx);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_euclidean_zero_diagonal_for_identical_inputs() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 3.0]]).unwrap();
        let c = cost_matrix(&x, &x, CostKind::SquaredEuclidean).unwrap();
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn squared_euclidean_scalar_grid() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let c = cost_matrix(&x, &y, CostKind::SquaredEuclidean).unwrap();
        assert_eq!(c.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn cosine_orthonormal_rows_give_unit_off_diagonal() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = cost_matrix(&x, &x, CostKind::Cosine).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((c.get(1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let x = Matrix::zeros(2, 3);
        let y = Matrix::zeros(2, 4);
        assert!(matches!(
            cost_matrix(&x, &y, CostKind::SquaredEuclidean),
            Err(OtError::Shape { .. })
        ));
    }

    #[test]
    fn cosine_zero_row_is_degenerate() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            cost_matrix(&x, &y, CostKind::Cosine),
            Err(OtError::Degenerate { side: "x", row: 0, .. })
        ));
    }

    #[test]
    fn costs_are_nonnegative() {
        let x = Matrix::from_rows(&[vec![0.3, -0.4], vec![0.3, -0.4]]).unwrap();
        for kind in [CostKind::SquaredEuclidean, CostKind::Cosine] {
            let c = cost_matrix(&x, &x, kind).unwrap();
            assert!(c.data().iter().all(|&v| v >= 0.0), "{kind:?}");
        }
    }
}
