use otlab_kernel::{dot, norm, Matrix, DEGENERATE_NORM};

use crate::cost::{cost_matrix, CostKind};
use crate::error::OtError;
use crate::grad::ot_value_gradient;
use crate::plan::TransportPlan;
use crate::solver::Solver;

/// Consistency regularizer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// No regularizer; the value is identically zero.
    None,
    /// Point-wise mean squared distance between paired joint rows.
    L2,
    /// Point-wise mean absolute distance between paired joint rows.
    L1,
    /// Point-wise mean cosine distance between paired joint rows.
    CosinePw,
    /// OT on vision features plus OT on class-text features, each with
    /// uniform marginals of its own size.
    SeparateOt,
    /// OT between the joint vision-text representations.
    JointOt,
    /// OT on vision features only.
    OtVision,
    /// OT on class-text features only.
    OtText,
}

impl ConstraintKind {
    pub fn slug(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::L2 => "l2",
            Self::L1 => "l1",
            Self::CosinePw => "cos",
            Self::SeparateOt => "sep-ot",
            Self::JointOt => "joint-ot",
            Self::OtVision => "ot-vision",
            Self::OtText => "ot-text",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "l2" => Some(Self::L2),
            "l1" => Some(Self::L1),
            "cos" => Some(Self::CosinePw),
            "sep-ot" => Some(Self::SeparateOt),
            "joint-ot" => Some(Self::JointOt),
            "ot-vision" => Some(Self::OtVision),
            "ot-text" => Some(Self::OtText),
            _ => None,
        }
    }

    /// Kinds that solve a transport problem over the batch.
    pub fn uses_ot(self) -> bool {
        matches!(
            self,
            Self::SeparateOt | Self::JointOt | Self::OtVision | Self::OtText
        )
    }

    pub const ALL: [ConstraintKind; 8] = [
        Self::None,
        Self::L2,
        Self::L1,
        Self::CosinePw,
        Self::SeparateOt,
        Self::JointOt,
        Self::OtVision,
        Self::OtText,
    ];
}

/// Point-wise distance used by `loss_pointwise`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseMetric {
    L2,
    L1,
    Cosine,
}

/// Per-instance concatenation of a vision embedding and the class-text
/// embedding of that instance's label; each half is L2-normalized before
/// concatenation so neither modality dominates the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRepresentation {
    features: Matrix,
    vision_dim: usize,
    text_dim: usize,
}

impl JointRepresentation {
    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn vision_dim(&self) -> usize {
        self.vision_dim
    }

    pub fn text_dim(&self) -> usize {
        self.text_dim
    }

    /// Split a gradient over the joint rows back into vision and text
    /// blocks.
    pub fn split_grad(&self, grad: &Matrix) -> (Matrix, Matrix) {
        (
            grad.slice_cols(0, self.vision_dim),
            grad.slice_cols(self.vision_dim, self.vision_dim + self.text_dim),
        )
    }
}

/// Build the joint representation from per-instance vision rows and the
/// text embedding of each instance's class (duplicate labels duplicate
/// rows by design).
pub fn build_joint(h: &Matrix, g_per_instance: &Matrix) -> Result<JointRepresentation, OtError> {
    if h.rows() != g_per_instance.rows() {
        return Err(OtError::Shape {
            op: "build_joint",
            lhs: h.shape(),
            rhs: g_per_instance.shape(),
        });
    }
    let hn = h.normalize_rows()?;
    let gn = g_per_instance.normalize_rows()?;
    Ok(JointRepresentation {
        features: hn.hstack(&gn)?,
        vision_dim: h.cols(),
        text_dim: g_per_instance.cols(),
    })
}

/// Result of an OT-based consistency loss over one feature block.
#[derive(Debug, Clone)]
pub struct OtLossEval {
    pub value: f64,
    /// Gradient with respect to the adapted features, plan held fixed.
    pub grad: Matrix,
    pub plan: TransportPlan,
    pub converged: bool,
}

/// OT cost between the adapted and zero-shot feature rows seen as two
/// uniform empirical distributions, with its envelope gradient.
pub fn loss_jot(
    x: &Matrix,
    x_zs: &Matrix,
    kind: CostKind,
    solver: &Solver,
) -> Result<OtLossEval, OtError> {
    let cost = cost_matrix(x, x_zs, kind)?;
    let outcome = solver.solve(&cost)?;
    let grad = ot_value_gradient(x, x_zs, kind, &outcome.plan)?;
    Ok(OtLossEval {
        value: outcome.value,
        grad,
        plan: outcome.plan,
        converged: outcome.converged,
    })
}

/// Joint-representation convenience wrapper around [`loss_jot`].
pub fn loss_jot_joint(
    x: &JointRepresentation,
    x_zs: &JointRepresentation,
    kind: CostKind,
    solver: &Solver,
) -> Result<OtLossEval, OtError> {
    if x.vision_dim != x_zs.vision_dim || x.text_dim != x_zs.text_dim {
        return Err(OtError::Shape {
            op: "loss_jot_joint",
            lhs: x.features.shape(),
            rhs: x_zs.features.shape(),
        });
    }
    loss_jot(&x.features, &x_zs.features, kind, solver)
}

/// Point-wise consistency loss `(1/n) sum_i c(x_i, xzs_i)` with its
/// analytic gradient with respect to `x`.
pub fn loss_pointwise(
    x: &Matrix,
    x_zs: &Matrix,
    metric: PointwiseMetric,
) -> Result<(f64, Matrix), OtError> {
    if x.shape() != x_zs.shape() || x.rows() == 0 {
        return Err(OtError::Shape {
            op: "loss_pointwise",
            lhs: x.shape(),
            rhs: x_zs.shape(),
        });
    }
    let n = x.rows() as f64;
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    let mut value = 0.0;
    for i in 0..x.rows() {
        let a = x.row(i);
        let b = x_zs.row(i);
        match metric {
            PointwiseMetric::L2 => {
                for (k, (&ak, &bk)) in a.iter().zip(b).enumerate() {
                    let d = ak - bk;
                    value += d * d;
                    grad.row_mut(i)[k] = 2.0 * d / n;
                }
            }
            PointwiseMetric::L1 => {
                for (k, (&ak, &bk)) in a.iter().zip(b).enumerate() {
                    let d = ak - bk;
                    value += d.abs();
                    grad.row_mut(i)[k] = d.signum() / n * if d == 0.0 { 0.0 } else { 1.0 };
                }
            }
            PointwiseMetric::Cosine => {
                let na = norm(a);
                let nb = norm(b);
                if na < DEGENERATE_NORM {
                    return Err(OtError::Degenerate { side: "x", row: i, norm: na });
                }
                if nb < DEGENERATE_NORM {
                    return Err(OtError::Degenerate { side: "x_zs", row: i, norm: nb });
                }
                let cos = dot(a, b) / (na * nb);
                value += (1.0 - cos).max(0.0);
                for (k, (&ak, &bk)) in a.iter().zip(b).enumerate() {
                    grad.row_mut(i)[k] = -(bk / nb - cos * ak / na) / (na * n);
                }
            }
        }
    }
    Ok((value / n, grad))
}

/// Result of the separate-OT constraint: one transport problem per
/// modality, sizes may differ.
#[derive(Debug, Clone)]
pub struct SeparateOtEval {
    pub value: f64,
    pub grad_vision: Matrix,
    pub grad_text: Matrix,
    pub plan_vision: TransportPlan,
    pub plan_text: TransportPlan,
    pub converged: bool,
}

/// `OT(h, h_zs) + OT(g, g_zs)`, each term with uniform marginals of its
/// own size. The text side is per-class, so its row count may differ from
/// the vision batch size.
pub fn loss_separate_ot(
    h: &Matrix,
    h_zs: &Matrix,
    g: &Matrix,
    g_zs: &Matrix,
    kind: CostKind,
    solver: &Solver,
) -> Result<SeparateOtEval, OtError> {
    let vision = loss_jot(h, h_zs, kind, solver)?;
    let text = loss_jot(g, g_zs, kind, solver)?;
    Ok(SeparateOtEval {
        value: vision.value + text.value,
        grad_vision: vision.grad,
        grad_text: text.grad,
        plan_vision: vision.plan,
        plan_text: text.plan,
        converged: vision.converged && text.converged,
    })
}

/// The diagonal plan `diag(1/n)` that rewrites the point-wise constraint
/// in transport form.
pub fn pointwise_as_plan(n: usize) -> Result<TransportPlan, OtError> {
    TransportPlan::diagonal(n)
}
