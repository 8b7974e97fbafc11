//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use otlab::train::{grad_prompts, PromptGrads};
use otlab_kernel::{Matrix, Rng};
use otlab_model::{predict, ClassEmbeddings, EncoderWeights, ModelDims, ModelPair, PromptParams};
use otlab_ot::{
    build_joint, cost_matrix, loss_pointwise, ConstraintKind, CostKind, PointwiseMetric, Solver,
    TransportPlan,
};

/// A small random model pair for gradient checks; zero-shot prompts are a
/// separate draw so the consistency terms are active.
pub fn random_model(rng: &mut Rng, dims: ModelDims, tau: f64) -> ModelPair {
    let weights = |rng: &mut Rng, d_in: usize| EncoderWeights {
        w1: rng.gaussian_matrix(dims.hidden_dim, d_in + dims.prompt_dim, 0.4),
        w2: rng.gaussian_matrix(dims.embed_dim, dims.hidden_dim, 0.4),
    };
    let vision = weights(rng, dims.input_dim);
    let text = weights(rng, dims.text_dim);
    let draw = |rng: &mut Rng| rng.gaussian_matrix(1, dims.prompt_dim, 0.3).row(0).to_vec();
    ModelPair {
        dims,
        vision,
        text,
        prompts: PromptParams { vision: draw(rng), text: draw(rng) },
        zs_prompts: PromptParams { vision: draw(rng), text: draw(rng) },
        tau,
        seed: 0,
    }
}

/// A random batch over the given class set.
pub fn random_batch(
    rng: &mut Rng,
    n: usize,
    input_dim: usize,
    class_set: &[usize],
) -> (Matrix, Vec<usize>) {
    let x = rng.gaussian_matrix(n, input_dim, 1.0);
    let labels = (0..n).map(|_| class_set[rng.below(class_set.len())]).collect();
    (x, labels)
}

/// The objective whose gradient `grad_prompts` reports: cross-entropy
/// plus `lambda` times the constraint with any transport plans held
/// fixed (envelope treatment), evaluated at explicit prompt vectors.
#[allow(clippy::too_many_arguments)]
pub fn frozen_objective(
    model: &ModelPair,
    emb: &ClassEmbeddings,
    x: &Matrix,
    labels: &[usize],
    class_set: &[usize],
    constraint: ConstraintKind,
    lambda: f64,
    cost: CostKind,
    plans: &[TransportPlan],
    p: &[f64],
    q: &[f64],
) -> f64 {
    let mut m = model.clone();
    m.prompts = PromptParams { vision: p.to_vec(), text: q.to_vec() };

    let h = m.adapted_vision_features(x).unwrap();
    let g = m.adapted_text_features(emb, class_set).unwrap();
    let probs = predict(&h, &g, m.tau).unwrap();
    let mut ce = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let pos = class_set.iter().position(|&c| c == label).unwrap();
        ce -= probs.get(i, pos).ln();
    }
    ce /= labels.len() as f64;

    if lambda == 0.0 || constraint == ConstraintKind::None {
        return ce;
    }

    let h_zs = m.zero_shot_vision_features(x).unwrap();
    let g_zs = m.zero_shot_text_features(emb, class_set).unwrap();
    let label_pos: Vec<usize> = labels
        .iter()
        .map(|&l| class_set.iter().position(|&c| c == l).unwrap())
        .collect();

    let reg = match constraint {
        ConstraintKind::None => unreachable!(),
        ConstraintKind::L2 | ConstraintKind::L1 | ConstraintKind::CosinePw => {
            let joint = build_joint(&h, &g.take_rows(&label_pos)).unwrap();
            let joint_zs = build_joint(&h_zs, &g_zs.take_rows(&label_pos)).unwrap();
            let metric = match constraint {
                ConstraintKind::L2 => PointwiseMetric::L2,
                ConstraintKind::L1 => PointwiseMetric::L1,
                _ => PointwiseMetric::Cosine,
            };
            loss_pointwise(joint.features(), joint_zs.features(), metric).unwrap().0
        }
        ConstraintKind::JointOt => {
            let joint = build_joint(&h, &g.take_rows(&label_pos)).unwrap();
            let joint_zs = build_joint(&h_zs, &g_zs.take_rows(&label_pos)).unwrap();
            let c = cost_matrix(joint.features(), joint_zs.features(), cost).unwrap();
            plans[0].transport_cost(&c).unwrap()
        }
        ConstraintKind::SeparateOt => {
            let cv = cost_matrix(&h, &h_zs, cost).unwrap();
            let ct = cost_matrix(&g, &g_zs, cost).unwrap();
            plans[0].transport_cost(&cv).unwrap() + plans[1].transport_cost(&ct).unwrap()
        }
        ConstraintKind::OtVision => {
            let cv = cost_matrix(&h, &h_zs, cost).unwrap();
            plans[0].transport_cost(&cv).unwrap()
        }
        ConstraintKind::OtText => {
            let ct = cost_matrix(&g, &g_zs, cost).unwrap();
            plans[0].transport_cost(&ct).unwrap()
        }
    };
    ce + lambda * reg
}

/// Central-difference check of `grad_prompts` against the frozen-plan
/// objective. Returns the vector-level relative errors for `(dp, dq)`.
#[allow(clippy::too_many_arguments)]
pub fn prompt_gradient_errors(
    model: &ModelPair,
    emb: &ClassEmbeddings,
    x: &Matrix,
    labels: &[usize],
    class_set: &[usize],
    constraint: ConstraintKind,
    lambda: f64,
    cost: CostKind,
    solver: &Solver,
) -> (f64, f64) {
    let grads: PromptGrads = grad_prompts(
        model, emb, x, labels, class_set, constraint, lambda, cost, solver,
    )
    .unwrap();
    let h = 1e-5;
    let objective = |p: &[f64], q: &[f64]| {
        frozen_objective(
            model, emb, x, labels, class_set, constraint, lambda, cost, &grads.plans, p, q,
        )
    };

    let p0 = model.prompts.vision.clone();
    let q0 = model.prompts.text.clone();
    let fd_vec = |along_p: bool| -> Vec<f64> {
        let dims = if along_p { p0.len() } else { q0.len() };
        (0..dims)
            .map(|k| {
                let mut plus_p = p0.clone();
                let mut plus_q = q0.clone();
                let mut minus_p = p0.clone();
                let mut minus_q = q0.clone();
                if along_p {
                    plus_p[k] += h;
                    minus_p[k] -= h;
                } else {
                    plus_q[k] += h;
                    minus_q[k] -= h;
                }
                (objective(&plus_p, &plus_q) - objective(&minus_p, &minus_q)) / (2.0 * h)
            })
            .collect()
    };

    let rel = |analytic: &[f64], fd: &[f64]| {
        let diff: f64 = analytic
            .iter()
            .zip(fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = analytic
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(fd.iter().map(|b| b * b).sum::<f64>().sqrt())
            .max(1e-8);
        diff / scale
    };

    (rel(&grads.dp, &fd_vec(true)), rel(&grads.dq, &fd_vec(false)))
}
