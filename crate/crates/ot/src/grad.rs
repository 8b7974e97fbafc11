use otlab_kernel::Matrix;

use crate::cost::{cost_grad_x, CostKind};
use crate::error::OtError;
use crate::plan::TransportPlan;

/// Gradient of the transport cost `<gamma, C(x, y)>` with respect to `x`,
/// holding the plan fixed (envelope treatment): row `i` accumulates
/// `sum_j gamma_ij * dc(x_i, y_j)/dx_i`.
pub fn ot_value_gradient(
    x: &Matrix,
    y: &Matrix,
    kind: CostKind,
    plan: &TransportPlan,
) -> Result<Matrix, OtError> {
    if x.shape() != y.shape() {
        return Err(OtError::Shape {
            op: "ot_value_gradient",
            lhs: x.shape(),
            rhs: y.shape(),
        });
    }
    if plan.n() != x.rows() {
        return Err(OtError::Shape {
            op: "ot_value_gradient",
            lhs: (plan.n(), plan.n()),
            rhs: x.shape(),
        });
    }
    let n = x.rows();
    let mut grad = Matrix::zeros(n, x.cols());
    for i in 0..n {
        for j in 0..n {
            let g = plan.gamma().get(i, j);
            if g == 0.0 {
                continue;
            }
            cost_grad_x(kind, x.row(i), y.row(j), g, grad.row_mut(i));
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_matrix;
    use otlab_kernel::Rng;

    #[test]
    fn coincident_points_identity_plan_zero_gradient() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let plan = TransportPlan::diagonal(2).unwrap();
        let g = ot_value_gradient(&x, &x, CostKind::SquaredEuclidean, &plan).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_case_matches_hand_derivative() {
        // d/dx (x - 0)^2 at x = 1 is 2
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0]]).unwrap();
        let plan = TransportPlan::diagonal(1).unwrap();
        let g = ot_value_gradient(&x, &y, CostKind::SquaredEuclidean, &plan).unwrap();
        assert!((g.get(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn matches_finite_differences_with_plan_held_fixed() {
        let mut rng = Rng::new(4);
        for &kind in &[CostKind::SquaredEuclidean, CostKind::Cosine] {
            let n = 4;
            let d = 3;
            let x = rng.gaussian_matrix(n, d, 1.0);
            let y = rng.gaussian_matrix(n, d, 1.0);
            let cost = cost_matrix(&x, &y, kind).unwrap();
            let r = crate::sinkhorn::sinkhorn(
                &cost,
                &crate::sinkhorn::SinkhornConfig::default(),
            )
            .unwrap();
            let grad = ot_value_gradient(&x, &y, kind, &r.plan).unwrap();

            let h = 1e-5;
            for i in 0..n {
                for j in 0..d {
                    let mut xp = x.clone();
                    xp.set(i, j, x.get(i, j) + h);
                    let mut xm = x.clone();
                    xm.set(i, j, x.get(i, j) - h);
                    let fp = r.plan.transport_cost(&cost_matrix(&xp, &y, kind).unwrap()).unwrap();
                    let fm = r.plan.transport_cost(&cost_matrix(&xm, &y, kind).unwrap()).unwrap();
                    let fd = (fp - fm) / (2.0 * h);
                    let a = grad.get(i, j);
                    let denom = fd.abs().max(a.abs()).max(1e-8);
                    assert!(
                        ((a - fd) / denom).abs() < 1e-4,
                        "{kind:?} entry ({i},{j}): analytic {a} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_error() {
        let x = Matrix::zeros(2, 3);
        let y = Matrix::zeros(2, 4);
        let plan = TransportPlan::diagonal(2).unwrap();
        assert!(ot_value_gradient(&x, &y, CostKind::SquaredEuclidean, &plan).is_err());
    }
}
