use std::fmt;

use otlab_kernel::KernelError;

/// Errors raised by the model, data generation, and file I/O.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Kernel(KernelError),
    /// Invalid configuration or precondition violation.
    Config(String),
    /// Filesystem failure; message carries the path.
    Io(String),
    /// Malformed dataset or checkpoint file.
    Parse { line: usize, msg: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kernel(e) => write!(f, "{e}"),
            Self::Config(msg) => write!(f, "invalid config: {msg}"),
            Self::Io(msg) => write!(f, "io error: {msg}"),
            Self::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<KernelError> for ModelError {
    fn from(e: KernelError) -> Self {
        Self::Kernel(e)
    }
}
