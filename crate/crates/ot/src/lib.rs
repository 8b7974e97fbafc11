//! Discrete optimal transport between equal-size empirical distributions
//! with uniform weights, plus the consistency regularizers built on it.
//!
//! The exact solver reduces to min-cost assignment (an optimal vertex of
//! the transport polytope with uniform square marginals is a scaled
//! permutation); the entropic solver runs Sinkhorn in the log domain.
//! Gradients of transport costs use the fixed-plan envelope treatment.

mod constraints;
mod cost;
mod error;
mod exact;
mod grad;
mod plan;
mod sinkhorn;
mod solver;

pub use constraints::{
    build_joint, loss_jot, loss_jot_joint, loss_pointwise, loss_separate_ot, pointwise_as_plan,
    ConstraintKind, JointRepresentation, OtLossEval, PointwiseMetric, SeparateOtEval,
};
pub use cost::{cost_matrix, CostKind};
pub use error::OtError;
pub use exact::{brute_force_ot, exact_ot, BRUTE_FORCE_MAX_N};
pub use grad::ot_value_gradient;
pub use plan::{TransportPlan, PLAN_TOL};
pub use sinkhorn::{sinkhorn, SinkhornConfig, SinkhornEpsilon, SinkhornResult};
pub use solver::{SolveOutcome, Solver};
