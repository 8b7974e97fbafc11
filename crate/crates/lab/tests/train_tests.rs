//! Integration tests for pretraining, adaptation, and prompt gradients.

mod common;

use otlab::train::{
    adapt, batch_losses, grad_prompts, pretrain_zero_shot, PretrainConfig, TrainConfig,
};
use otlab::LabError;
use otlab_kernel::Rng;
use otlab_model::{checkpoint, evaluate, generate, ModelDims, SplitDataset, SyntheticSpec};
use otlab_ot::{ConstraintKind, CostKind, Solver};

fn dataset() -> SplitDataset {
    generate(&SyntheticSpec::default()).unwrap()
}

fn quick_adapt_cfg() -> TrainConfig {
    TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    }
}

#[test]
fn pretrained_zero_shot_clears_sanity_floor() {
    let ds = dataset();
    let model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let all: Vec<usize> = (0..ds.spec.num_classes).collect();
    let acc = evaluate(
        &model,
        &ds.eval.features,
        &ds.eval.labels,
        &ds.class_embeddings,
        &all,
    )
    .unwrap();
    assert!(
        acc >= 3.0 / ds.spec.num_classes as f64,
        "all-class zero-shot accuracy {acc} below sanity floor"
    );
}

#[test]
fn same_seed_gives_identical_checkpoint_bytes() {
    let ds = dataset();
    let cfg = PretrainConfig::default();
    let a = pretrain_zero_shot(&ds, &cfg).unwrap();
    let b = pretrain_zero_shot(&ds, &cfg).unwrap();
    assert_eq!(checkpoint::to_string(&a), checkpoint::to_string(&b));
}

#[test]
fn adapt_touches_only_the_adapted_prompts() {
    let ds = dataset();
    let pretrained = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let mut model = pretrained.clone();
    adapt(&mut model, &ds, &quick_adapt_cfg()).unwrap();
    assert_eq!(model.vision, pretrained.vision, "vision weights changed");
    assert_eq!(model.text, pretrained.text, "text weights changed");
    assert_eq!(model.zs_prompts, pretrained.zs_prompts, "zero-shot prompts changed");
    assert_ne!(model.prompts, pretrained.prompts, "adapted prompts never moved");
}

#[test]
fn zero_shot_features_are_bit_stable_across_adaptation() {
    let ds = dataset();
    let pretrained = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let before = pretrained
        .zero_shot_vision_features(&ds.eval.features)
        .unwrap();
    let mut model = pretrained.clone();
    adapt(&mut model, &ds, &quick_adapt_cfg()).unwrap();
    let after = model.zero_shot_vision_features(&ds.eval.features).unwrap();
    assert_eq!(before, after);
}

#[test]
fn unconstrained_adaptation_improves_base_accuracy() {
    let ds = dataset();
    let mut model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let base_eval = ds.base_eval();
    let zs_base = evaluate(
        &model,
        &base_eval.features,
        &base_eval.labels,
        &ds.class_embeddings,
        &ds.base_classes(),
    )
    .unwrap();
    let cfg = TrainConfig {
        constraint: ConstraintKind::None,
        lambda: 0.0,
        ..TrainConfig::default()
    };
    let record = adapt(&mut model, &ds, &cfg).unwrap();
    let final_base = record.final_row().base_acc;
    assert!(
        final_base > zs_base,
        "adaptation did not improve base accuracy: {final_base} vs zero-shot {zs_base}"
    );
}

#[test]
fn overwhelming_constraint_pins_accuracy_to_zero_shot_level() {
    // the strong-regularization limit: adaptation is suppressed and the
    // model stays at its starting accuracy
    let ds = dataset();
    let mut model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let cfg = TrainConfig {
        constraint: ConstraintKind::JointOt,
        lambda: 1000.0,
        ..TrainConfig::default()
    };
    let record = adapt(&mut model, &ds, &cfg).unwrap();
    let start = &record.rows[0];
    let end = record.final_row();
    assert!(
        (end.base_acc - start.base_acc).abs() <= 0.12,
        "base accuracy moved from {} to {} despite lambda=1000",
        start.base_acc,
        end.base_acc
    );
    let unconstrained = {
        let mut m2 = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
        let cfg = TrainConfig {
            constraint: ConstraintKind::None,
            lambda: 0.0,
            ..TrainConfig::default()
        };
        adapt(&mut m2, &ds, &cfg).unwrap().final_row().base_acc
    };
    assert!(end.base_acc <= unconstrained);
}

#[test]
fn run_record_hm_column_is_consistent() {
    let ds = dataset();
    let mut model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let record = adapt(&mut model, &ds, &quick_adapt_cfg()).unwrap();
    for row in &record.rows {
        let expect = otlab::train::harmonic_mean(row.base_acc, row.novel_acc);
        assert!((row.hm - expect).abs() <= 1e-9);
    }
}

#[test]
fn same_config_gives_identical_run_records() {
    let ds = dataset();
    let pretrained = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let cfg = quick_adapt_cfg();
    let mut m1 = pretrained.clone();
    let mut m2 = pretrained.clone();
    let r1 = adapt(&mut m1, &ds, &cfg).unwrap();
    let r2 = adapt(&mut m2, &ds, &cfg).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(r1.to_csv(), r2.to_csv());
}

#[test]
fn none_equals_joint_ot_at_lambda_zero() {
    let ds = dataset();
    let pretrained = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let mut m1 = pretrained.clone();
    let mut m2 = pretrained.clone();
    let none = adapt(
        &mut m1,
        &ds,
        &TrainConfig {
            constraint: ConstraintKind::None,
            lambda: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let jot0 = adapt(
        &mut m2,
        &ds,
        &TrainConfig {
            constraint: ConstraintKind::JointOt,
            lambda: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    assert_eq!(none.to_csv(), jot0.to_csv());
    assert_eq!(m1.prompts, m2.prompts);
}

#[test]
fn non_finite_loss_reports_training_error_with_epoch() {
    let ds = dataset();
    let mut model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    // a vanishing temperature pushes true-class probabilities to exact
    // zero for misclassified rows, so the CE loss overflows
    model.tau = 1e-9;
    let err = adapt(&mut model, &ds, &quick_adapt_cfg()).unwrap_err();
    match err {
        LabError::Training { epoch, .. } => assert!(epoch >= 1),
        other => panic!("expected training error, got {other}"),
    }
}

#[test]
fn lambda_zero_gradients_reduce_to_cross_entropy() {
    let mut rng = Rng::new(11);
    let dims = ModelDims {
        input_dim: 6,
        text_dim: 4,
        prompt_dim: 3,
        hidden_dim: 10,
        embed_dim: 5,
    };
    let model = common::random_model(&mut rng, dims, 0.05);
    let emb = otlab_model::ClassEmbeddings::new(rng.gaussian_matrix(4, 4, 1.0)).unwrap();
    let class_set: Vec<usize> = (0..4).collect();
    let (x, labels) = common::random_batch(&mut rng, 8, 6, &class_set);

    let ce_only = grad_prompts(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::None,
        0.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    let jot_zero = grad_prompts(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::JointOt,
        0.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    assert_eq!(ce_only.dp, jot_zero.dp);
    assert_eq!(ce_only.dq, jot_zero.dq);
    assert_eq!(jot_zero.loss_reg, 0.0);
}

#[test]
fn identical_prompts_make_joint_ot_term_vanish() {
    let mut rng = Rng::new(12);
    let dims = ModelDims {
        input_dim: 6,
        text_dim: 4,
        prompt_dim: 3,
        hidden_dim: 10,
        embed_dim: 5,
    };
    let mut model = common::random_model(&mut rng, dims, 0.05);
    model.prompts = model.zs_prompts.clone();
    let emb = otlab_model::ClassEmbeddings::new(rng.gaussian_matrix(4, 4, 1.0)).unwrap();
    let class_set: Vec<usize> = (0..4).collect();
    let (x, labels) = common::random_batch(&mut rng, 8, 6, &class_set);

    let with_reg = grad_prompts(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::JointOt,
        10.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    let without = grad_prompts(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::None,
        0.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    assert!(with_reg.loss_reg.abs() < 1e-12);
    for (a, b) in with_reg.dp.iter().zip(&without.dp) {
        assert!((a - b).abs() < 1e-9, "reg contributed to dp: {a} vs {b}");
    }
    for (a, b) in with_reg.dq.iter().zip(&without.dq) {
        assert!((a - b).abs() < 1e-9, "reg contributed to dq: {a} vs {b}");
    }
}

#[test]
fn prompt_gradients_match_finite_differences_for_every_kind() {
    let mut rng = Rng::new(13);
    let dims = ModelDims {
        input_dim: 6,
        text_dim: 4,
        prompt_dim: 3,
        hidden_dim: 10,
        embed_dim: 5,
    };
    let class_set: Vec<usize> = (0..4).collect();
    for (trial, &kind) in ConstraintKind::ALL.iter().enumerate() {
        let model = common::random_model(&mut rng, dims, 0.05);
        let emb = otlab_model::ClassEmbeddings::new(rng.gaussian_matrix(4, 4, 1.0)).unwrap();
        let (x, labels) = common::random_batch(&mut rng, 8, 6, &class_set);
        let solver = if trial % 2 == 0 {
            Solver::Exact
        } else {
            Solver::Sinkhorn(Default::default())
        };
        let (ep, eq) = common::prompt_gradient_errors(
            &model,
            &emb,
            &x,
            &labels,
            &class_set,
            kind,
            10.0,
            CostKind::SquaredEuclidean,
            &solver,
        );
        assert!(ep <= 1e-4, "{kind:?}: dp relative error {ep}");
        assert!(eq <= 1e-4, "{kind:?}: dq relative error {eq}");
    }
}

#[test]
fn batch_losses_match_grad_prompts_values() {
    let mut rng = Rng::new(14);
    let dims = ModelDims {
        input_dim: 6,
        text_dim: 4,
        prompt_dim: 3,
        hidden_dim: 10,
        embed_dim: 5,
    };
    let model = common::random_model(&mut rng, dims, 0.05);
    let emb = otlab_model::ClassEmbeddings::new(rng.gaussian_matrix(4, 4, 1.0)).unwrap();
    let class_set: Vec<usize> = (0..4).collect();
    let (x, labels) = common::random_batch(&mut rng, 8, 6, &class_set);
    let grads = grad_prompts(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::JointOt,
        10.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    let (ce, reg) = batch_losses(
        &model,
        &emb,
        &x,
        &labels,
        &class_set,
        ConstraintKind::JointOt,
        10.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap();
    assert!((grads.loss_ce - ce).abs() < 1e-12);
    assert!((grads.loss_reg - reg).abs() < 1e-12);
}

#[test]
fn batch_from_outside_class_set_is_rejected() {
    let ds = dataset();
    let model = pretrain_zero_shot(&ds, &PretrainConfig::default()).unwrap();
    let novel = ds.novel_train();
    let err = grad_prompts(
        &model,
        &ds.class_embeddings,
        &novel.features,
        &novel.labels,
        &ds.base_classes(),
        ConstraintKind::None,
        0.0,
        CostKind::SquaredEuclidean,
        &Solver::Exact,
    )
    .unwrap_err();
    assert!(matches!(err, LabError::Config(_)));
}
