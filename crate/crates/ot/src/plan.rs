use otlab_kernel::Matrix;

use crate::error::OtError;

/// Feasibility tolerance for marginals of plans returned by solvers.
pub const PLAN_TOL: f64 = 1e-6;

/// Nonnegative `n x n` coupling with uniform marginals `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    gamma: Matrix,
}

impl TransportPlan {
    /// Wrap a coupling matrix, checking squareness and nonnegativity.
    /// Marginal quality is queried separately via `max_marginal_violation`
    /// because a non-converged solver may hand back an infeasible plan.
    pub fn from_gamma(gamma: Matrix) -> Result<Self, OtError> {
        if gamma.rows() != gamma.cols() || gamma.rows() == 0 {
            return Err(OtError::NotSquare {
                rows: gamma.rows(),
                cols: gamma.cols(),
            });
        }
        if gamma.data().iter().any(|&v| v < 0.0) {
            return Err(OtError::Config("plan entries must be nonnegative".into()));
        }
        Ok(Self { gamma })
    }

    /// The diagonal plan `diag(1/n)`: the transport form of the point-wise
    /// constraint.
    pub fn diagonal(n: usize) -> Result<Self, OtError> {
        if n == 0 {
            return Err(OtError::Config("plan size must be at least 1".into()));
        }
        let mut gamma = Matrix::zeros(n, n);
        for i in 0..n {
            gamma.set(i, i, 1.0 / n as f64);
        }
        Ok(Self { gamma })
    }

    /// Permutation plan: row `i` sends its mass `1/n` to column `sigma[i]`.
    pub fn from_permutation(sigma: &[usize]) -> Result<Self, OtError> {
        let n = sigma.len();
        if n == 0 {
            return Err(OtError::Config("plan size must be at least 1".into()));
        }
        let mut gamma = Matrix::zeros(n, n);
        for (i, &j) in sigma.iter().enumerate() {
            gamma.set(i, j, 1.0 / n as f64);
        }
        Ok(Self { gamma })
    }

    pub fn n(&self) -> usize {
        self.gamma.rows()
    }

    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }

    /// Largest deviation of any row or column sum from `1/n`.
    pub fn max_marginal_violation(&self) -> f64 {
        let target = 1.0 / self.n() as f64;
        let rows = self.gamma.row_sums();
        let cols = self.gamma.col_sums();
        rows.iter()
            .chain(cols.iter())
            .fold(0.0f64, |m, &s| m.max((s - target).abs()))
    }

    /// Check the uniform-marginal invariants at tolerance `tol`.
    pub fn verify(&self, tol: f64) -> Result<(), OtError> {
        let v = self.max_marginal_violation();
        if v > tol {
            return Err(OtError::Config(format!(
                "plan marginals violate uniform constraint by {v:e} (tol {tol:e})"
            )));
        }
        Ok(())
    }

    /// Transport cost `<gamma, C>`.
    pub fn transport_cost(&self, cost: &Matrix) -> Result<f64, OtError> {
        if cost.shape() != self.gamma.shape() {
            return Err(OtError::Shape {
                op: "transport_cost",
                lhs: self.gamma.shape(),
                rhs: cost.shape(),
            });
        }
        Ok(self
            .gamma
            .data()
            .iter()
            .zip(cost.data())
            .map(|(&g, &c)| g * c)
            .sum())
    }
}
