use std::fmt;

use otlab_model::ModelError;
use otlab_ot::OtError;

/// Errors raised by training runs and experiment drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum LabError {
    Model(ModelError),
    Ot(OtError),
    Config(String),
    /// Training produced a non-finite loss.
    Training { epoch: usize, msg: String },
    Io(String),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => write!(f, "{e}"),
            Self::Ot(e) => write!(f, "{e}"),
            Self::Config(msg) => write!(f, "invalid config: {msg}"),
            Self::Training { epoch, msg } => write!(f, "training failed at epoch {epoch}: {msg}"),
            Self::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<ModelError> for LabError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<OtError> for LabError {
    fn from(e: OtError) -> Self {
        Self::Ot(e)
    }
}

impl From<otlab_kernel::KernelError> for LabError {
    fn from(e: otlab_kernel::KernelError) -> Self {
        Self::Model(ModelError::Kernel(e))
    }
}
