use std::fmt::Write as _;

use rayon::prelude::*;

use otlab_kernel::Rng;
use otlab_model::{encode, ModelPair, SplitDataset};
use otlab_ot::{
    build_joint, loss_jot, loss_pointwise, ConstraintKind, CostKind, PointwiseMetric, Solver,
};

use crate::error::LabError;
use crate::train::{adapt, pretrain_zero_shot, PretrainConfig, TrainConfig};

/// Tolerance for the transport-vs-point-wise inequality checks.
pub const LEMMA2_TOL: f64 = 1e-9;

/// Outcome of the transport-bound certification.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Report {
    pub trials: usize,
    /// Cases where the OT value exceeded the point-wise value beyond
    /// tolerance. Zero certifies the bound.
    pub violations: usize,
    /// Largest observed `pointwise - transport` gap.
    pub max_gap: f64,
    /// Smallest observed gap (negative would be a violation).
    pub min_gap: f64,
}

/// Draw random adapted/zero-shot feature sets and certify that the OT
/// consistency value never exceeds the matching point-wise value
/// (squared-Euclidean against L2, cosine against cosine), using the
/// exact solver.
pub fn check_lemma2(trials: usize, seed: u64) -> Result<Lemma2Report, LabError> {
    if trials == 0 {
        return Err(LabError::Config("trials must be at least 1".into()));
    }
    let mut rng = Rng::new(seed);
    let mut report = Lemma2Report {
        trials,
        violations: 0,
        max_gap: f64::NEG_INFINITY,
        min_gap: f64::INFINITY,
    };
    let pairs = [
        (CostKind::SquaredEuclidean, PointwiseMetric::L2),
        (CostKind::Cosine, PointwiseMetric::Cosine),
    ];
    for _ in 0..trials {
        let n = rng.int_in(2, 16);
        let d = rng.int_in(2, 8);
        let x = rng.gaussian_matrix(n, d, 1.0);
        let x_zs = rng.gaussian_matrix(n, d, 1.0);
        for (kind, metric) in pairs {
            let jot = loss_jot(&x, &x_zs, kind, &Solver::Exact)?;
            let (pw, _) = loss_pointwise(&x, &x_zs, metric)?;
            let gap = pw - jot.value;
            report.max_gap = report.max_gap.max(gap);
            report.min_gap = report.min_gap.min(gap);
            if gap < -LEMMA2_TOL {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Options for the feasible-set sampling experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleSetOptions {
    pub num_samples: usize,
    /// Standard deviation of the prompt perturbations around the adapted
    /// initialization.
    pub prompt_std: f64,
    /// Constraint level; `None` auto-calibrates so the point-wise set
    /// holds roughly 20% of the samples.
    pub epsilon: Option<f64>,
    pub seed: u64,
}

impl Default for FeasibleSetOptions {
    fn default() -> Self {
        Self {
            num_samples: 10_000,
            prompt_std: 0.3,
            epsilon: None,
            seed: 0,
        }
    }
}

/// Counts of sampled prompt pairs inside the epsilon^2-sublevel sets of
/// the point-wise and transport constraints. `violations == 0` is the
/// inclusion certificate; `count_ot > count_pw` is the measurable form of
/// the broader feasible domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSetReport {
    pub epsilon: f64,
    pub num_samples: usize,
    pub count_pw: usize,
    pub count_ot: usize,
    pub violations: usize,
    /// Per-sample loss pairs in sample order, for CSV output.
    pub samples: Vec<(f64, f64)>,
}

impl FeasibleSetReport {
    pub fn to_csv(&self) -> String {
        let eps_sq = self.epsilon * self.epsilon;
        let mut out = String::from("sample,l_pw,l_jot,in_pw,in_ot\n");
        for (i, &(pw, jot)) in self.samples.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{},{}",
                i,
                pw,
                jot,
                (pw <= eps_sq) as u8,
                (jot <= eps_sq) as u8
            );
        }
        out
    }
}

/// Sample prompt pairs around the adapted initialization, push the full
/// base training split through the encoders per sample, and classify each
/// sample into the two sublevel sets (point-wise L2 and exact joint OT
/// with squared-Euclidean cost).
pub fn feasible_set_experiment(
    model: &ModelPair,
    dataset: &SplitDataset,
    opts: &FeasibleSetOptions,
) -> Result<FeasibleSetReport, LabError> {
    if opts.num_samples == 0 {
        return Err(LabError::Config("num_samples must be at least 1".into()));
    }
    if opts.prompt_std < 0.0 {
        return Err(LabError::Config("prompt_std must be nonnegative".into()));
    }
    let base_classes = dataset.base_classes();
    let base_train = dataset.base_train();
    let label_pos: Vec<usize> = base_train
        .labels
        .iter()
        .map(|&l| base_classes.iter().position(|&c| c == l).unwrap())
        .collect();

    let h_zs = model.zero_shot_vision_features(&base_train.features)?;
    let g_zs = model.zero_shot_text_features(&dataset.class_embeddings, &base_classes)?;
    let joint_zs = build_joint(&h_zs, &g_zs.take_rows(&label_pos))?;
    let class_rows = dataset.class_embeddings.rows_for(&base_classes)?;

    let samples: Result<Vec<(f64, f64)>, LabError> = (0..opts.num_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::with_stream(opts.seed, i as u64);
            let perturb = |center: &[f64], rng: &mut Rng| -> Vec<f64> {
                center
                    .iter()
                    .map(|&c| c + opts.prompt_std * rng.standard_normal())
                    .collect()
            };
            let p = perturb(&model.prompts.vision, &mut rng);
            let q = perturb(&model.prompts.text, &mut rng);

            let h = encode(&base_train.features, &model.vision, &p)?;
            let g = encode(&class_rows, &model.text, &q)?;
            let joint = build_joint(&h, &g.take_rows(&label_pos))?;

            let (pw, _) =
                loss_pointwise(joint.features(), joint_zs.features(), PointwiseMetric::L2)?;
            let jot = loss_jot(
                joint.features(),
                joint_zs.features(),
                CostKind::SquaredEuclidean,
                &Solver::Exact,
            )?;
            Ok((pw, jot.value))
        })
        .collect();
    let samples = samples?;

    let eps_sq = match opts.epsilon {
        Some(e) => e * e,
        None => {
            // 20th percentile of the point-wise values
            let mut pw: Vec<f64> = samples.iter().map(|&(p, _)| p).collect();
            pw.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let k = ((opts.num_samples as f64) * 0.2) as usize;
            pw[k.min(opts.num_samples - 1)]
        }
    };

    let mut count_pw = 0;
    let mut count_ot = 0;
    let mut violations = 0;
    for &(pw, jot) in &samples {
        let in_pw = pw <= eps_sq;
        let in_ot = jot <= eps_sq;
        count_pw += in_pw as usize;
        count_ot += in_ot as usize;
        violations += (in_pw && !in_ot) as usize;
    }

    Ok(FeasibleSetReport {
        epsilon: eps_sq.sqrt(),
        num_samples: opts.num_samples,
        count_pw,
        count_ot,
        violations,
        samples,
    })
}

/// One adaptation cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub base_acc: f64,
    pub novel_acc: f64,
    pub hm: f64,
}

pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,seed,base_acc,novel_acc,hm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{},{:.6},{:.6},{:.6}",
            r.lambda, r.seed, r.base_acc, r.novel_acc, r.hm
        );
    }
    out
}

/// Full adaptation run per `(lambda, seed)` cell. Each seed pretrains its
/// own zero-shot model; every lambda for that seed starts from the same
/// initialization. Rows come back sorted by `(lambda, seed)`.
pub fn lambda_sweep(
    dataset: &SplitDataset,
    lambdas: &[f64],
    seeds: &[u64],
    train_cfg: &TrainConfig,
    pretrain_cfg: &PretrainConfig,
) -> Result<Vec<SweepRow>, LabError> {
    if lambdas.is_empty() || seeds.is_empty() {
        return Err(LabError::Config("lambdas and seeds must be nonempty".into()));
    }
    let mut rows: Vec<SweepRow> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<SweepRow>, LabError> {
            let pretrained = pretrain_zero_shot(
                dataset,
                &PretrainConfig {
                    seed,
                    ..*pretrain_cfg
                },
            )?;
            let mut out = Vec::with_capacity(lambdas.len());
            for &lambda in lambdas {
                let mut model = pretrained.clone();
                let cfg = TrainConfig {
                    lambda,
                    seed,
                    ..*train_cfg
                };
                let record = adapt(&mut model, dataset, &cfg)?;
                let last = record.final_row();
                out.push(SweepRow {
                    lambda,
                    seed,
                    base_acc: last.base_acc,
                    novel_acc: last.novel_acc,
                    hm: last.hm,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}

/// One constraint-comparison cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub constraint: ConstraintKind,
    pub seed: u64,
    pub base_acc: f64,
    pub novel_acc: f64,
    pub hm: f64,
}

pub fn compare_rows_to_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("constraint,seed,base_acc,novel_acc,hm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6}",
            r.constraint.slug(),
            r.seed,
            r.base_acc,
            r.novel_acc,
            r.hm
        );
    }
    out
}

/// Adaptation run per `(constraint, seed)` cell at the configured lambda.
/// The `None` cell runs with the regularizer disabled regardless of
/// lambda. Rows come back sorted by `(constraint slug, seed)`.
pub fn compare_constraints(
    dataset: &SplitDataset,
    kinds: &[ConstraintKind],
    seeds: &[u64],
    train_cfg: &TrainConfig,
    pretrain_cfg: &PretrainConfig,
) -> Result<Vec<CompareRow>, LabError> {
    if kinds.is_empty() || seeds.is_empty() {
        return Err(LabError::Config("kinds and seeds must be nonempty".into()));
    }
    let mut rows: Vec<CompareRow> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<CompareRow>, LabError> {
            let pretrained = pretrain_zero_shot(
                dataset,
                &PretrainConfig {
                    seed,
                    ..*pretrain_cfg
                },
            )?;
            let mut out = Vec::with_capacity(kinds.len());
            for &kind in kinds {
                let mut model = pretrained.clone();
                let cfg = TrainConfig {
                    constraint: kind,
                    seed,
                    ..*train_cfg
                };
                let record = adapt(&mut model, dataset, &cfg)?;
                let last = record.final_row();
                out.push(CompareRow {
                    constraint: kind,
                    seed,
                    base_acc: last.base_acc,
                    novel_acc: last.novel_acc,
                    hm: last.hm,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.constraint
            .slug()
            .cmp(b.constraint.slug())
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}
