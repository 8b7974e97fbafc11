//! Toy dual encoder with learnable prompt vectors and a frozen zero-shot
//! twin, plus the synthetic base/novel classification data it trains on.
//!
//! This crate deliberately contains the whole inference path (encode,
//! predict, evaluate) and none of the transport machinery: evaluation
//! must not depend on OT code.

pub mod checkpoint;
pub mod data;
mod encoder;
mod error;
mod eval;
mod pair;

pub use data::{generate, ClassEmbeddings, LabeledSet, SplitDataset, SyntheticSpec};
pub use encoder::{
    encode, encode_cached, encoder_backward, EncoderCache, EncoderGrads, EncoderWeights,
};
pub use error::ModelError;
pub use eval::evaluate;
pub use pair::{predict, ModelDims, ModelPair, PromptParams, DEFAULT_TAU, PROMPT_INIT_STD};
