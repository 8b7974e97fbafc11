use otlab_kernel::Matrix;

use crate::data::ClassEmbeddings;
use crate::error::ModelError;
use crate::pair::{predict, ModelPair};

/// Accuracy of the adapted model on labeled rows, restricted to the given
/// class set: each row is scored against `class_set` only and the argmax
/// class compared to its label.
///
/// This is the inference path: it touches neither the zero-shot prompts
/// nor any transport computation.
pub fn evaluate(
    model: &ModelPair,
    rows: &Matrix,
    labels: &[usize],
    class_embeddings: &ClassEmbeddings,
    class_set: &[usize],
) -> Result<f64, ModelError> {
    if class_set.is_empty() {
        return Err(ModelError::Config("class set must be nonempty".into()));
    }
    if rows.rows() != labels.len() {
        return Err(ModelError::Config(format!(
            "{} rows but {} labels",
            rows.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(ModelError::Config("no rows to evaluate".into()));
    }
    let h = model.adapted_vision_features(rows)?;
    let g = model.adapted_text_features(class_embeddings, class_set)?;
    let probs = predict(&h, &g, model.tau)?;

    let mut correct = 0usize;
    for (i, &label) in labels.iter().enumerate() {
        let mut best = 0usize;
        for k in 1..class_set.len() {
            if probs.get(i, k) > probs.get(i, best) {
                best = k;
            }
        }
        if class_set[best] == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}
