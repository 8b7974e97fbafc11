use std::fmt;

use otlab_kernel::KernelError;

/// Errors raised by transport solvers and constraint evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum OtError {
    Kernel(KernelError),
    /// Cost matrices and transport plans must be square.
    NotSquare { rows: usize, cols: usize },
    /// Paired feature blocks disagree in shape.
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// A cosine cost was requested for a (near-)zero row.
    Degenerate {
        side: &'static str,
        row: usize,
        norm: f64,
    },
    /// Invalid solver configuration.
    Config(String),
    /// Brute-force enumeration refused: n! too large.
    SizeLimit { n: usize, max: usize },
}

impl fmt::Display for OtError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kernel(e) => write!(f, "{e}"),
            Self::NotSquare { rows, cols } => {
                write!(f, "expected a square matrix, got {rows}x{cols}")
            }
            Self::Shape { op, lhs, rhs } => write!(
                f,
                "shape mismatch in {op}: {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            Self::Degenerate { side, row, norm } => {
                write!(f, "degenerate row {row} on {side} (norm {norm:e})")
            }
            Self::Config(msg) => write!(f, "invalid config: {msg}"),
            Self::SizeLimit { n, max } => {
                write!(f, "brute force limited to n <= {max}, got n = {n}")
            }
        }
    }
}

impl std::error::Error for OtError {}

impl From<KernelError> for OtError {
    fn from(e: KernelError) -> Self {
        Self::Kernel(e)
    }
}
