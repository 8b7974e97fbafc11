use std::fmt;

/// Errors raised by the matrix kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    /// Operand shapes are incompatible for the requested operation.
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// A row with (near-)zero Euclidean norm cannot be normalized.
    DegenerateRow { row: usize, norm: f64 },
    /// Input data contains NaN or infinite entries.
    NonFinite { context: &'static str },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShapeMismatch { op, lhs, rhs } => write!(
                f,
                "shape mismatch in {op}: lhs is {}x{}, rhs is {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            Self::DegenerateRow { row, norm } => {
                write!(f, "row {row} has degenerate norm {norm:e}")
            }
            Self::NonFinite { context } => write!(f, "non-finite value in {context}"),
        }
    }
}

impl std::error::Error for KernelError {}
