//! Minimal dense numeric kernel: row-major f64 matrices, seeded
//! randomness, and the row-wise reductions the rest of the workspace
//! builds on. Everything here is pure and re-entrant.

mod error;
mod matrix;
mod rng;

pub use error::KernelError;
pub use matrix::{dot, norm, Matrix, DEGENERATE_NORM};
pub use rng::Rng;
