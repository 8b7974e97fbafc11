use std::fmt::Write as _;

use otlab_kernel::{Matrix, Rng};
use otlab_model::{
    encode, encode_cached, encoder_backward, evaluate, ClassEmbeddings, EncoderWeights, ModelDims,
    ModelPair, PromptParams, SplitDataset, DEFAULT_TAU, PROMPT_INIT_STD,
};
use otlab_ot::{
    build_joint, loss_jot, loss_pointwise, loss_separate_ot, ConstraintKind, CostKind,
    PointwiseMetric, Solver, TransportPlan,
};

use crate::error::LabError;

/// Configuration for pretraining the zero-shot model on all classes.
///
/// Pretraining runs on a domain-shifted copy of the training rows: every
/// class is displaced by a fixed-length random offset drawn from the
/// dataset seed, so the corpus/downstream relationship is a property of
/// the data, not of the run seed. The zero-shot model is therefore
/// competent on the downstream task but systematically misaligned, which
/// is the regime where prompt adaptation has something to do and
/// something to forget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub dims: ModelDims,
    pub tau: f64,
    /// Length of the fixed per-class offset between the pretraining
    /// corpus and the downstream rows.
    pub domain_shift: f64,
}

/// Sub-stream of the dataset seed that draws the per-class domain offsets.
const DOMAIN_SHIFT_STREAM: u64 = 0x5f17;

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.05,
            epochs: 30,
            batch_size: 16,
            seed: 0,
            dims: ModelDims::default(),
            tau: DEFAULT_TAU,
            domain_shift: 4.8,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.lr <= 0.0 {
            return Err(LabError::Config("lr must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(LabError::Config("epochs and batch_size must be positive".into()));
        }
        if self.tau <= 0.0 {
            return Err(LabError::Config("tau must be positive".into()));
        }
        if self.domain_shift < 0.0 {
            return Err(LabError::Config("domain_shift must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Configuration for prompt adaptation on the base split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub constraint: ConstraintKind,
    pub cost: CostKind,
    pub solver: Solver,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            epochs: 50,
            batch_size: 16,
            lambda: 10.0,
            constraint: ConstraintKind::JointOt,
            cost: CostKind::SquaredEuclidean,
            solver: Solver::Sinkhorn(Default::default()),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.lr <= 0.0 {
            return Err(LabError::Config("lr must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(LabError::Config("epochs and batch_size must be positive".into()));
        }
        if self.lambda < 0.0 {
            return Err(LabError::Config("lambda must be nonnegative".into()));
        }
        if self.constraint.uses_ot() && self.batch_size < 2 {
            return Err(LabError::Config(
                "batch_size must be at least 2 for OT constraints".into(),
            ));
        }
        Ok(())
    }
}

/// Per-epoch metrics row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub ce_loss: f64,
    pub reg_loss: f64,
    pub base_acc: f64,
    pub novel_acc: f64,
    pub hm: f64,
}

/// Metrics of an adaptation run. Row 0 holds the state before the first
/// update; row `e` the state after epoch `e`. Losses are full-pass values
/// over the base training split at that state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<EpochRow>,
}

impl RunRecord {
    pub fn final_row(&self) -> &EpochRow {
        self.rows.last().expect("run record has at least the initial row")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,ce_loss,reg_loss,base_acc,novel_acc,hm\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.epoch, r.ce_loss, r.reg_loss, r.base_acc, r.novel_acc, r.hm
            );
        }
        out
    }
}

/// `2ab / (a + b)`, defined as 0 when both inputs are 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Cross-entropy over a class subset.
///
/// Returns the mean loss and gradients with respect to the unit-norm
/// vision features `h` and class-text features `g`.
fn cross_entropy(
    h: &Matrix,
    g: &Matrix,
    label_pos: &[usize],
    tau: f64,
) -> Result<(f64, Matrix, Matrix), LabError> {
    let n = h.rows();
    let probs = h.matmul_nt(g)?.scale(1.0 / tau).softmax_rows();
    let mut loss = 0.0;
    let mut d_logits = probs.clone();
    for (i, &y) in label_pos.iter().enumerate() {
        loss -= probs.get(i, y).ln();
        d_logits.set(i, y, d_logits.get(i, y) - 1.0);
    }
    loss /= n as f64;
    let d_logits = d_logits.scale(1.0 / (n as f64 * tau));
    let d_h = d_logits.matmul(g)?;
    let d_g = d_logits.transpose().matmul(h)?;
    Ok((loss, d_h, d_g))
}

fn label_positions(labels: &[usize], class_set: &[usize]) -> Result<Vec<usize>, LabError> {
    labels
        .iter()
        .map(|&l| {
            class_set.iter().position(|&c| c == l).ok_or_else(|| {
                LabError::Config(format!("label {l} not in the active class set"))
            })
        })
        .collect()
}

/// Regularizer value and feature-space gradients for one batch.
struct RegEval {
    value: f64,
    d_h: Option<Matrix>,
    d_g: Option<Matrix>,
    plans: Vec<TransportPlan>,
    converged: bool,
}

/// Evaluate the selected constraint between adapted batch features and
/// the zero-shot features of the same instances.
#[allow(clippy::too_many_arguments)]
fn eval_constraint(
    model: &ModelPair,
    emb: &ClassEmbeddings,
    x: &Matrix,
    h: &Matrix,
    g: &Matrix,
    label_pos: &[usize],
    class_set: &[usize],
    constraint: ConstraintKind,
    cost: CostKind,
    solver: &Solver,
) -> Result<RegEval, LabError> {
    if constraint == ConstraintKind::None {
        return Ok(RegEval {
            value: 0.0,
            d_h: None,
            d_g: None,
            plans: vec![],
            converged: true,
        });
    }

    let h_zs = model.zero_shot_vision_features(x)?;

    let scatter = |d_rows: &Matrix, rows: usize| {
        let mut d_g = Matrix::zeros(rows, d_rows.cols());
        for (i, &pos) in label_pos.iter().enumerate() {
            for k in 0..d_rows.cols() {
                d_g.set(pos, k, d_g.get(pos, k) + d_rows.get(i, k));
            }
        }
        d_g
    };

    match constraint {
        ConstraintKind::None => unreachable!(),
        ConstraintKind::L2 | ConstraintKind::L1 | ConstraintKind::CosinePw => {
            let g_zs = model.zero_shot_text_features(emb, class_set)?;
            let joint = build_joint(h, &g.take_rows(label_pos))?;
            let joint_zs = build_joint(&h_zs, &g_zs.take_rows(label_pos))?;
            let metric = match constraint {
                ConstraintKind::L2 => PointwiseMetric::L2,
                ConstraintKind::L1 => PointwiseMetric::L1,
                _ => PointwiseMetric::Cosine,
            };
            let (value, grad) = loss_pointwise(joint.features(), joint_zs.features(), metric)?;
            let (d_h, d_g_rows) = joint.split_grad(&grad);
            Ok(RegEval {
                value,
                d_h: Some(d_h),
                d_g: Some(scatter(&d_g_rows, g.rows())),
                plans: vec![],
                converged: true,
            })
        }
        ConstraintKind::JointOt => {
            let g_zs = model.zero_shot_text_features(emb, class_set)?;
            let joint = build_joint(h, &g.take_rows(label_pos))?;
            let joint_zs = build_joint(&h_zs, &g_zs.take_rows(label_pos))?;
            let eval = loss_jot(joint.features(), joint_zs.features(), cost, solver)?;
            let (d_h, d_g_rows) = joint.split_grad(&eval.grad);
            Ok(RegEval {
                value: eval.value,
                d_h: Some(d_h),
                d_g: Some(scatter(&d_g_rows, g.rows())),
                plans: vec![eval.plan],
                converged: eval.converged,
            })
        }
        ConstraintKind::SeparateOt => {
            let g_zs = model.zero_shot_text_features(emb, class_set)?;
            let eval = loss_separate_ot(h, &h_zs, g, &g_zs, cost, solver)?;
            Ok(RegEval {
                value: eval.value,
                d_h: Some(eval.grad_vision),
                d_g: Some(eval.grad_text),
                plans: vec![eval.plan_vision, eval.plan_text],
                converged: eval.converged,
            })
        }
        ConstraintKind::OtVision => {
            let eval = loss_jot(h, &h_zs, cost, solver)?;
            Ok(RegEval {
                value: eval.value,
                d_h: Some(eval.grad),
                d_g: None,
                plans: vec![eval.plan],
                converged: eval.converged,
            })
        }
        ConstraintKind::OtText => {
            let g_zs = model.zero_shot_text_features(emb, class_set)?;
            let eval = loss_jot(g, &g_zs, cost, solver)?;
            Ok(RegEval {
                value: eval.value,
                d_h: None,
                d_g: Some(eval.grad),
                plans: vec![eval.plan],
                converged: eval.converged,
            })
        }
    }
}

/// Gradients of `L_ce + lambda * R` with respect to the prompt vectors.
#[derive(Debug, Clone)]
pub struct PromptGrads {
    pub loss_ce: f64,
    pub loss_reg: f64,
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    /// Plans solved by the regularizer, exposed so gradient checks can
    /// re-evaluate the frozen-plan objective.
    pub plans: Vec<TransportPlan>,
    pub solver_converged: bool,
}

/// One batch of the adaptation objective: CE over `class_set` plus the
/// selected consistency term against the frozen twin, differentiated into
/// the prompt vectors. OT plans are held fixed (envelope treatment);
/// point-wise terms are fully analytic.
#[allow(clippy::too_many_arguments)]
pub fn grad_prompts(
    model: &ModelPair,
    emb: &ClassEmbeddings,
    x: &Matrix,
    labels: &[usize],
    class_set: &[usize],
    constraint: ConstraintKind,
    lambda: f64,
    cost: CostKind,
    solver: &Solver,
) -> Result<PromptGrads, LabError> {
    let label_pos = label_positions(labels, class_set)?;
    let class_rows = emb.rows_for(class_set)?;

    let vision_cache = encode_cached(x, &model.vision, &model.prompts.vision)?;
    let text_cache = encode_cached(&class_rows, &model.text, &model.prompts.text)?;
    let h = vision_cache.features();
    let g = text_cache.features();

    let (loss_ce, mut d_h, mut d_g) = cross_entropy(h, g, &label_pos, model.tau)?;

    let mut loss_reg = 0.0;
    let mut plans = vec![];
    let mut converged = true;
    if lambda != 0.0 && constraint != ConstraintKind::None {
        let reg = eval_constraint(
            model, emb, x, h, g, &label_pos, class_set, constraint, cost, solver,
        )?;
        loss_reg = reg.value;
        plans = reg.plans;
        converged = reg.converged;
        if let Some(rh) = reg.d_h {
            d_h = d_h.add(&rh.scale(lambda))?;
        }
        if let Some(rg) = reg.d_g {
            d_g = d_g.add(&rg.scale(lambda))?;
        }
    }

    let dp = encoder_backward(&vision_cache, &model.vision, &d_h)?.prompt;
    let dq = encoder_backward(&text_cache, &model.text, &d_g)?.prompt;

    Ok(PromptGrads {
        loss_ce,
        loss_reg,
        dp,
        dq,
        plans,
        solver_converged: converged,
    })
}

/// Forward-only batch losses at the current prompts.
#[allow(clippy::too_many_arguments)]
pub fn batch_losses(
    model: &ModelPair,
    emb: &ClassEmbeddings,
    x: &Matrix,
    labels: &[usize],
    class_set: &[usize],
    constraint: ConstraintKind,
    lambda: f64,
    cost: CostKind,
    solver: &Solver,
) -> Result<(f64, f64), LabError> {
    let label_pos = label_positions(labels, class_set)?;
    let class_rows = emb.rows_for(class_set)?;
    let h = encode(x, &model.vision, &model.prompts.vision)?;
    let g = encode(&class_rows, &model.text, &model.prompts.text)?;

    let probs = h.matmul_nt(&g)?.scale(1.0 / model.tau).softmax_rows();
    let mut ce = 0.0;
    for (i, &y) in label_pos.iter().enumerate() {
        ce -= probs.get(i, y).ln();
    }
    ce /= x.rows() as f64;

    let mut reg = 0.0;
    if lambda != 0.0 && constraint != ConstraintKind::None {
        reg = eval_constraint(
            model, emb, x, &h, &g, &label_pos, class_set, constraint, cost, solver,
        )?
        .value;
    }
    Ok((ce, reg))
}

/// Pretrain the dual encoder on all classes with cross-entropy, then
/// freeze everything: the returned pair carries the trained prompts as
/// zero-shot constants and freshly initialized adapted prompts.
pub fn pretrain_zero_shot(
    dataset: &SplitDataset,
    cfg: &PretrainConfig,
) -> Result<ModelPair, LabError> {
    cfg.validate()?;
    let dims = cfg.dims;
    if dims.input_dim != dataset.spec.input_dim || dims.text_dim != dataset.spec.text_dim {
        return Err(LabError::Config(format!(
            "model dims ({}, {}) do not match dataset dims ({}, {})",
            dims.input_dim, dims.text_dim, dataset.spec.input_dim, dataset.spec.text_dim
        )));
    }

    let mut rng = Rng::new(cfg.seed);
    let glorot = |rng: &mut Rng, rows: usize, cols: usize| {
        let std = 1.0 / (cols as f64).sqrt();
        rng.gaussian_matrix(rows, cols, std)
    };
    let mut vision = EncoderWeights {
        w1: glorot(&mut rng, dims.hidden_dim, dims.input_dim + dims.prompt_dim),
        w2: glorot(&mut rng, dims.embed_dim, dims.hidden_dim),
    };
    let mut text = EncoderWeights {
        w1: glorot(&mut rng, dims.hidden_dim, dims.text_dim + dims.prompt_dim),
        w2: glorot(&mut rng, dims.embed_dim, dims.hidden_dim),
    };
    let mut p0 = rng.gaussian_matrix(1, dims.prompt_dim, PROMPT_INIT_STD).row(0).to_vec();
    let mut q0 = rng.gaussian_matrix(1, dims.prompt_dim, PROMPT_INIT_STD).row(0).to_vec();

    let all_classes: Vec<usize> = (0..dataset.spec.num_classes).collect();
    let class_rows = dataset.class_embeddings.rows_for(&all_classes)?;
    let train = &dataset.train;

    // Pretraining corpus: downstream rows displaced by a fixed-length,
    // random-direction offset per class.
    let num_classes = dataset.spec.num_classes;
    let mut shift_rng = Rng::with_stream(dataset.spec.seed, DOMAIN_SHIFT_STREAM);
    let offsets = {
        let raw = shift_rng.gaussian_matrix(num_classes, dims.input_dim, 1.0);
        raw.normalize_rows()?.scale(cfg.domain_shift)
    };
    let mut corpus = train.features.clone();
    for (i, &label) in train.labels.iter().enumerate() {
        for (j, v) in corpus.row_mut(i).iter_mut().enumerate() {
            *v += offsets.get(label, j);
        }
    }

    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let x = corpus.take_rows(chunk);
            let label_pos: Vec<usize> = chunk.iter().map(|&i| train.labels[i]).collect();

            let vcache = encode_cached(&x, &vision, &p0)?;
            let tcache = encode_cached(&class_rows, &text, &q0)?;
            let (loss, d_h, d_g) =
                cross_entropy(vcache.features(), tcache.features(), &label_pos, cfg.tau)?;
            if !loss.is_finite() {
                return Err(LabError::Training {
                    epoch,
                    msg: format!("non-finite pretraining loss {loss}"),
                });
            }

            let vgrads = encoder_backward(&vcache, &vision, &d_h)?;
            let tgrads = encoder_backward(&tcache, &text, &d_g)?;

            vision.w1 = vision.w1.sub(&vgrads.w1.scale(cfg.lr))?;
            vision.w2 = vision.w2.sub(&vgrads.w2.scale(cfg.lr))?;
            text.w1 = text.w1.sub(&tgrads.w1.scale(cfg.lr))?;
            text.w2 = text.w2.sub(&tgrads.w2.scale(cfg.lr))?;
            for (p, d) in p0.iter_mut().zip(&vgrads.prompt) {
                *p -= cfg.lr * d;
            }
            for (q, d) in q0.iter_mut().zip(&tgrads.prompt) {
                *q -= cfg.lr * d;
            }
        }
    }

    let zs_prompts = PromptParams {
        vision: p0,
        text: q0,
    };
    let mut pair = ModelPair {
        dims,
        vision,
        text,
        prompts: zs_prompts.clone(),
        zs_prompts,
        tau: cfg.tau,
        seed: cfg.seed,
    };
    pair.reset_adapted_prompts(&mut rng);
    Ok(pair)
}

/// Adapt the prompt vectors on the base split with plain SGD on
/// `L_ce + lambda * R`. Only `(p, q)` change; encoder weights and the
/// zero-shot prompts stay untouched.
pub fn adapt(
    model: &mut ModelPair,
    dataset: &SplitDataset,
    cfg: &TrainConfig,
) -> Result<RunRecord, LabError> {
    cfg.validate()?;
    let base_classes = dataset.base_classes();
    let novel_classes = dataset.novel_classes();
    let base_train = dataset.base_train();
    let base_eval = dataset.base_eval();
    let novel_eval = dataset.novel_eval();

    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..base_train.len()).collect();

    let mut record = RunRecord { rows: vec![] };
    let metrics = |model: &ModelPair, epoch: usize| -> Result<EpochRow, LabError> {
        let mut ce_sum = 0.0;
        let mut reg_sum = 0.0;
        let mut count = 0usize;
        for chunk in (0..base_train.len()).collect::<Vec<_>>().chunks(cfg.batch_size) {
            let x = base_train.features.take_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| base_train.labels[i]).collect();
            let (ce, reg) = batch_losses(
                model,
                &dataset.class_embeddings,
                &x,
                &labels,
                &base_classes,
                cfg.constraint,
                cfg.lambda,
                cfg.cost,
                &cfg.solver,
            )?;
            ce_sum += ce * chunk.len() as f64;
            reg_sum += reg * chunk.len() as f64;
            count += chunk.len();
        }
        let base_acc = evaluate(
            model,
            &base_eval.features,
            &base_eval.labels,
            &dataset.class_embeddings,
            &base_classes,
        )?;
        let novel_acc = evaluate(
            model,
            &novel_eval.features,
            &novel_eval.labels,
            &dataset.class_embeddings,
            &novel_classes,
        )?;
        Ok(EpochRow {
            epoch,
            ce_loss: ce_sum / count as f64,
            reg_loss: reg_sum / count as f64,
            base_acc,
            novel_acc,
            hm: harmonic_mean(base_acc, novel_acc),
        })
    };

    record.rows.push(metrics(model, 0)?);

    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let x = base_train.features.take_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| base_train.labels[i]).collect();
            let grads = grad_prompts(
                model,
                &dataset.class_embeddings,
                &x,
                &labels,
                &base_classes,
                cfg.constraint,
                cfg.lambda,
                cfg.cost,
                &cfg.solver,
            )?;
            let total = grads.loss_ce + cfg.lambda * grads.loss_reg;
            if !total.is_finite() {
                return Err(LabError::Training {
                    epoch,
                    msg: format!("non-finite loss {total}"),
                });
            }
            for (p, d) in model.prompts.vision.iter_mut().zip(&grads.dp) {
                *p -= cfg.lr * d;
            }
            for (q, d) in model.prompts.text.iter_mut().zip(&grads.dq) {
                *q -= cfg.lr * d;
            }
        }
        record.rows.push(metrics(model, epoch)?);
    }

    Ok(record)
}
