use otlab_kernel::Matrix;

use crate::error::OtError;
use crate::plan::TransportPlan;

/// Entropic regularization strength.
///
/// `MeanScaled` pins epsilon to the cost magnitude so one default serves
/// every experiment; `Absolute` is for tests that probe specific limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinkhornEpsilon {
    MeanScaled(f64),
    Absolute(f64),
}

impl SinkhornEpsilon {
    pub fn resolve(self, cost: &Matrix) -> f64 {
        match self {
            Self::MeanScaled(scale) => (scale * cost.mean()).max(1e-12),
            Self::Absolute(eps) => eps,
        }
    }

    fn raw(self) -> f64 {
        match self {
            Self::MeanScaled(v) | Self::Absolute(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    pub epsilon: SinkhornEpsilon,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: SinkhornEpsilon::MeanScaled(0.05),
            max_iters: 1000,
            tol: 1e-8,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<(), OtError> {
        if self.epsilon.raw() <= 0.0 {
            return Err(OtError::Config("sinkhorn epsilon must be positive".into()));
        }
        if self.tol <= 0.0 {
            return Err(OtError::Config("sinkhorn tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(OtError::Config("sinkhorn max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SinkhornResult {
    pub plan: TransportPlan,
    /// Transport cost `<gamma, C>` of the returned plan, without the
    /// entropy term.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub marginal_error: f64,
}

/// Entropic OT with uniform marginals, iterated in the log domain with
/// max-subtraction. Stops when the worst marginal violation drops below
/// `cfg.tol` or after `cfg.max_iters` sweeps; non-convergence is reported
/// through the flag, not an error.
pub fn sinkhorn(cost: &Matrix, cfg: &SinkhornConfig) -> Result<SinkhornResult, OtError> {
    cfg.validate()?;
    if cost.rows() != cost.cols() || cost.rows() == 0 {
        return Err(OtError::NotSquare {
            rows: cost.rows(),
            cols: cost.cols(),
        });
    }
    if cost.data().iter().any(|&v| v < 0.0) {
        return Err(OtError::Config("cost entries must be nonnegative".into()));
    }

    let n = cost.rows();
    let eps = cfg.epsilon.resolve(cost);
    let log_marginal = -(n as f64).ln();

    // scaled[i*n+j] = -c_ij / eps
    let scaled: Vec<f64> = cost.data().iter().map(|&c| -c / eps).collect();
    let mut u = vec![log_marginal; n];
    let mut v = vec![log_marginal; n];
    let mut buf = vec![0.0f64; n];

    let mut iterations = 0;
    let mut converged = false;
    let mut marginal_error = f64::INFINITY;

    while iterations < cfg.max_iters {
        iterations += 1;
        for i in 0..n {
            for j in 0..n {
                buf[j] = scaled[i * n + j] + v[j];
            }
            u[i] = log_marginal - log_sum_exp(&buf);
        }
        for j in 0..n {
            for i in 0..n {
                buf[i] = scaled[i * n + j] + u[i];
            }
            v[j] = log_marginal - log_sum_exp(&buf);
        }
        marginal_error = max_marginal_violation(&scaled, &u, &v, n);
        if marginal_error < cfg.tol {
            converged = true;
            break;
        }
    }

    let mut gamma = Matrix::zeros(n, n);
    let mut value = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = (u[i] + scaled[i * n + j] + v[j]).exp();
            gamma.set(i, j, g);
            value += g * cost.get(i, j);
        }
    }

    Ok(SinkhornResult {
        plan: TransportPlan::from_gamma(gamma)?,
        value,
        converged,
        iterations,
        marginal_error,
    })
}

fn max_marginal_violation(scaled: &[f64], u: &[f64], v: &[f64], n: usize) -> f64 {
    let target = 1.0 / n as f64;
    let mut worst = 0.0f64;
    let mut col_sums = vec![0.0f64; n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let g = (u[i] + scaled[i * n + j] + v[j]).exp();
            row_sum += g;
            col_sums[j] += g;
        }
        worst = worst.max((row_sum - target).abs());
    }
    for s in col_sums {
        worst = worst.max((s - target).abs());
    }
    worst
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}
