use otlab_kernel::{dot, Matrix};

use crate::error::ModelError;

/// Frozen two-layer encoder weights for one modality.
///
/// `w1` maps the prompt-augmented input to the hidden layer, `w2` maps
/// the tanh activations to the embedding space. Adaptation never writes
/// these; only prompt vectors are trainable.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    /// `hidden x (d_in + d_p)`
    pub w1: Matrix,
    /// `d_emb x hidden`
    pub w2: Matrix,
}

impl EncoderWeights {
    pub fn hidden_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.w2.rows()
    }

    pub fn augmented_dim(&self) -> usize {
        self.w1.cols()
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    /// `n x (d_in + d_p)`: inputs with the prompt appended to every row.
    augmented: Matrix,
    /// `n x hidden`, after tanh.
    hidden: Matrix,
    /// Row norms of the pre-normalization embeddings.
    norms: Vec<f64>,
    /// `n x d_emb`, unit rows.
    features: Matrix,
    input_dim: usize,
}

impl EncoderCache {
    pub fn features(&self) -> &Matrix {
        &self.features
    }
}

/// Gradients produced by [`encoder_backward`].
#[derive(Debug, Clone)]
pub struct EncoderGrads {
    pub w1: Matrix,
    pub w2: Matrix,
    pub prompt: Vec<f64>,
}

/// Encode input rows: `normalize(w2 * tanh(w1 * [x_i | p]))`.
pub fn encode(x: &Matrix, w: &EncoderWeights, prompt: &[f64]) -> Result<Matrix, ModelError> {
    Ok(encode_cached(x, w, prompt)?.features)
}

/// Encoding that retains activations for [`encoder_backward`].
pub fn encode_cached(
    x: &Matrix,
    w: &EncoderWeights,
    prompt: &[f64],
) -> Result<EncoderCache, ModelError> {
    if x.cols() + prompt.len() != w.augmented_dim() {
        return Err(ModelError::Config(format!(
            "encoder expects input dim {} (got {} inputs + {} prompt)",
            w.augmented_dim(),
            x.cols(),
            prompt.len()
        )));
    }
    let prompt_block = broadcast_row(prompt, x.rows());
    let augmented = x.hstack(&prompt_block)?;
    let hidden = augmented.matmul_nt(&w.w1)?.map(f64::tanh);
    let pre_norm = hidden.matmul_nt(&w.w2)?;
    let norms: Vec<f64> = (0..pre_norm.rows())
        .map(|i| dot(pre_norm.row(i), pre_norm.row(i)).sqrt())
        .collect();
    let features = pre_norm.normalize_rows()?;
    Ok(EncoderCache {
        augmented,
        hidden,
        norms,
        features,
        input_dim: x.cols(),
    })
}

/// Reverse-mode gradients of a scalar loss through the encoder given the
/// gradient with respect to the normalized output rows.
pub fn encoder_backward(
    cache: &EncoderCache,
    w: &EncoderWeights,
    d_features: &Matrix,
) -> Result<EncoderGrads, ModelError> {
    let n = cache.features.rows();
    let d_emb = cache.features.cols();
    debug_assert_eq!(d_features.shape(), (n, d_emb));

    // Through row normalization: project out the radial component.
    let mut d_pre = Matrix::zeros(n, d_emb);
    for i in 0..n {
        let f = cache.features.row(i);
        let g = d_features.row(i);
        let radial = dot(g, f);
        let inv = 1.0 / cache.norms[i];
        for k in 0..d_emb {
            d_pre.set(i, k, (g[k] - radial * f[k]) * inv);
        }
    }

    let d_w2 = d_pre.transpose().matmul(&cache.hidden)?;
    let d_hidden = d_pre.matmul(&w.w2)?;
    // tanh'(z) = 1 - tanh(z)^2
    let d_z = d_hidden.hadamard(&cache.hidden.map(|t| 1.0 - t * t))?;
    let d_w1 = d_z.transpose().matmul(&cache.augmented)?;
    let d_aug = d_z.matmul(&w.w1)?;

    let prompt_dim = w.augmented_dim() - cache.input_dim;
    let mut prompt = vec![0.0; prompt_dim];
    for i in 0..n {
        let row = d_aug.row(i);
        for (k, p) in prompt.iter_mut().enumerate() {
            *p += row[cache.input_dim + k];
        }
    }

    Ok(EncoderGrads {
        w1: d_w1,
        w2: d_w2,
        prompt,
    })
}

fn broadcast_row(row: &[f64], n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, row.len());
    for i in 0..n {
        m.row_mut(i).copy_from_slice(row);
    }
    m
}
