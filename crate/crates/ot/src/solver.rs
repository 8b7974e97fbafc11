use otlab_kernel::Matrix;

use crate::error::OtError;
use crate::exact::exact_ot;
use crate::plan::TransportPlan;
use crate::sinkhorn::{sinkhorn, SinkhornConfig};

/// Which transport solver a loss evaluation uses.
///
/// Training favors the entropic solver; certification experiments use the
/// exact one because the inequalities must be checked against the true
/// minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Exact,
    Sinkhorn(SinkhornConfig),
}

impl Solver {
    pub fn slug(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Sinkhorn(_) => "sinkhorn",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: TransportPlan,
    pub value: f64,
    pub converged: bool,
}

impl Solver {
    pub fn solve(&self, cost: &Matrix) -> Result<SolveOutcome, OtError> {
        match self {
            Self::Exact => {
                let (plan, value) = exact_ot(cost)?;
                Ok(SolveOutcome {
                    plan,
                    value,
                    converged: true,
                })
            }
            Self::Sinkhorn(cfg) => {
                let r = sinkhorn(cost, cfg)?;
                Ok(SolveOutcome {
                    plan: r.plan,
                    value: r.value,
                    converged: r.converged,
                })
            }
        }
    }
}
