use otlab_kernel::{Matrix, Rng};

use crate::data::ClassEmbeddings;
use crate::encoder::{encode, EncoderWeights};
use crate::error::ModelError;

/// Model dimensions. Defaults are sized so finite-difference checks run
/// in milliseconds while forgetting stays observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub input_dim: usize,
    pub text_dim: usize,
    pub prompt_dim: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            input_dim: 16,
            text_dim: 8,
            prompt_dim: 4,
            hidden_dim: 32,
            embed_dim: 8,
        }
    }
}

/// Trainable prompt vectors, one per modality. The only parameters that
/// change during adaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptParams {
    pub vision: Vec<f64>,
    pub text: Vec<f64>,
}

/// Standard deviation for fresh vision-prompt initialization.
pub const PROMPT_INIT_STD: f64 = 0.02;

/// Default softmax temperature, matching a sharp CLIP-like logit scale.
pub const DEFAULT_TAU: f64 = 0.01;

/// Adapted model and its frozen zero-shot twin.
///
/// Both share the same encoder weights; they differ only in prompts.
/// The zero-shot prompts never change after pretraining.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPair {
    pub dims: ModelDims,
    pub vision: EncoderWeights,
    pub text: EncoderWeights,
    /// Adapted (trainable) prompts.
    pub prompts: PromptParams,
    /// Frozen zero-shot prompt constants.
    pub zs_prompts: PromptParams,
    pub tau: f64,
    /// Seed that produced this model, recorded for reproducibility.
    pub seed: u64,
}

impl ModelPair {
    /// Fresh adapted prompts per the initialization contract: the vision
    /// prompt is drawn from `N(0, 0.02^2)`, the text prompt starts at the
    /// zero-shot constant.
    pub fn reset_adapted_prompts(&mut self, rng: &mut Rng) {
        let v = rng.gaussian_matrix(1, self.dims.prompt_dim, PROMPT_INIT_STD);
        self.prompts = PromptParams {
            vision: v.row(0).to_vec(),
            text: self.zs_prompts.text.clone(),
        };
    }

    pub fn adapted_vision_features(&self, x: &Matrix) -> Result<Matrix, ModelError> {
        encode(x, &self.vision, &self.prompts.vision)
    }

    pub fn zero_shot_vision_features(&self, x: &Matrix) -> Result<Matrix, ModelError> {
        encode(x, &self.vision, &self.zs_prompts.vision)
    }

    /// Adapted text embeddings over a class subset, rows in `class_set`
    /// order.
    pub fn adapted_text_features(
        &self,
        emb: &ClassEmbeddings,
        class_set: &[usize],
    ) -> Result<Matrix, ModelError> {
        encode(&emb.rows_for(class_set)?, &self.text, &self.prompts.text)
    }

    pub fn zero_shot_text_features(
        &self,
        emb: &ClassEmbeddings,
        class_set: &[usize],
    ) -> Result<Matrix, ModelError> {
        encode(&emb.rows_for(class_set)?, &self.text, &self.zs_prompts.text)
    }
}

/// Class posterior per Eq.-style cosine scoring: row `i` is the softmax
/// over classes of `<h_i, g_k> / tau`. Inputs must be unit-norm rows.
pub fn predict(h: &Matrix, g: &Matrix, tau: f64) -> Result<Matrix, ModelError> {
    if tau <= 0.0 {
        return Err(ModelError::Config(format!(
            "temperature must be positive, got {tau}"
        )));
    }
    if h.cols() != g.cols() {
        return Err(ModelError::Config(format!(
            "embedding dims differ: {} vs {}",
            h.cols(),
            g.cols()
        )));
    }
    let logits = h.matmul_nt(g)?.scale(1.0 / tau);
    Ok(logits.softmax_rows())
}
