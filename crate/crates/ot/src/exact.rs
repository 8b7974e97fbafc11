use otlab_kernel::Matrix;

use crate::error::OtError;
use crate::plan::TransportPlan;

/// Largest size accepted by `brute_force_ot` (factorial enumeration).
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Exact optimal transport between two uniform equal-size empirical
/// distributions.
///
/// For uniform square marginals an optimal vertex of the transport
/// polytope is a permutation matrix scaled by `1/n`, so the problem
/// reduces to min-cost assignment, solved here in O(n^3).
pub fn exact_ot(cost: &Matrix) -> Result<(TransportPlan, f64), OtError> {
    check_square(cost)?;
    let n = cost.rows();
    let sigma = min_cost_assignment(cost);
    let value = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| cost.get(i, j))
        .sum::<f64>()
        / n as f64;
    Ok((TransportPlan::from_permutation(&sigma)?, value))
}

/// Oracle for `exact_ot`: minimum over all n! permutation plans of
/// `(1/n) * sum_i c(i, sigma(i))`. Limited to `n <= 8`.
pub fn brute_force_ot(cost: &Matrix) -> Result<f64, OtError> {
    check_square(cost)?;
    let n = cost.rows();
    if n > BRUTE_FORCE_MAX_N {
        return Err(OtError::SizeLimit {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut cols: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute_min(cost, &mut cols, 0, 0.0, &mut best);
    Ok(best / n as f64)
}

fn check_square(cost: &Matrix) -> Result<(), OtError> {
    if cost.rows() != cost.cols() || cost.rows() == 0 {
        return Err(OtError::NotSquare {
            rows: cost.rows(),
            cols: cost.cols(),
        });
    }
    Ok(())
}

fn permute_min(cost: &Matrix, cols: &mut Vec<usize>, row: usize, acc: f64, best: &mut f64) {
    if row == cols.len() {
        if acc < *best {
            *best = acc;
        }
        return;
    }
    for k in row..cols.len() {
        cols.swap(row, k);
        permute_min(cost, cols, row + 1, acc + cost.get(row, cols[row]), best);
        cols.swap(row, k);
    }
}

/// Min-cost assignment via the potentials (Hungarian/Jonker-Volgenant
/// class) algorithm; returns `sigma` with row `i` matched to column
/// `sigma[i]`. Indices inside are 1-based with 0 as the virtual start.
fn min_cost_assignment(cost: &Matrix) -> Vec<usize> {
    let n = cost.rows();
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];

        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut sigma = vec![0usize; n];
    for j in 1..=n {
        if matched[j] > 0 {
            sigma[matched[j] - 1] = j - 1;
        }
    }
    sigma
}
