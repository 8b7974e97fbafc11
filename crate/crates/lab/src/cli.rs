use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use otlab::config::{parse_config_file, RunManifest};
use otlab::harness::{
    check_lemma2, compare_constraints, compare_rows_to_csv, feasible_set_experiment,
    lambda_sweep, sweep_rows_to_csv, FeasibleSetOptions,
};
use otlab::train::{adapt, pretrain_zero_shot, PretrainConfig, TrainConfig};
use otlab::LabError;
use otlab_model::{checkpoint, data, evaluate, ModelError, ModelPair, SplitDataset, SyntheticSpec};
use otlab_ot::{ConstraintKind, CostKind, SinkhornConfig, SinkhornEpsilon, Solver};

/// Exit codes: 0 success, 1 runtime/training/certificate failure,
/// 2 usage/config error.
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }

    fn runtime(msg: impl Into<String>) -> Self {
        Self { code: 1, msg: msg.into() }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        let code = match &e {
            LabError::Config(_) => 2,
            LabError::Model(m) => model_error_code(m),
            LabError::Ot(otlab_ot::OtError::Config(_)) => 2,
            _ => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self { code: model_error_code(&e), msg: e.to_string() }
    }
}

fn model_error_code(e: &ModelError) -> u8 {
    match e {
        ModelError::Config(_) => 2,
        _ => 1,
    }
}

#[derive(Parser)]
#[command(
    name = "otlab",
    version,
    about = "Dual-encoder prompt adaptation with optimal-transport consistency regularization"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic base/novel classification dataset.
    GenData(GenDataArgs),
    /// Pretrain the zero-shot dual encoder on all classes.
    Pretrain(PretrainArgs),
    /// Adapt prompt vectors on the base split under a constraint.
    Adapt(AdaptArgs),
    /// Certify the transport-vs-point-wise bound on random draws.
    CheckLemma2(CheckLemma2Args),
    /// Sample prompt space and compare constraint sublevel sets.
    FeasibleSet(FeasibleSetArgs),
    /// Run the full adaptation grid over regularization strengths.
    SweepLambda(SweepArgs),
    /// Compare constraint kinds over seeds.
    Compare(CompareArgs),
}

/// `key = value` pairs from `--config`, consumed key by key; leftovers
/// are unknown keys and fail closed.
struct FileConfig {
    map: BTreeMap<String, (String, usize)>,
    path: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Option<PathBuf>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        if let Some(p) = path {
            for (k, v, line) in parse_config_file(p).map_err(CliError::from)? {
                if map.insert(k.clone(), (v, line)).is_some() {
                    return Err(CliError::usage(format!(
                        "{}:{line}: duplicate key `{k}`",
                        p.display()
                    )));
                }
            }
        }
        Ok(Self { map, path: path.clone() })
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::usage(format!(
                    "{}:{line}: invalid value `{v}` for key `{key}`",
                    self.path.as_ref().unwrap().display()
                ))
            }),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some((key, (_, line))) = self.map.into_iter().next() {
            return Err(CliError::usage(format!(
                "{}:{line}: unknown key `{key}`",
                self.path.as_ref().unwrap().display()
            )));
        }
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".manifest");
    PathBuf::from(os)
}

#[derive(Args)]
struct GenDataArgs {
    /// Config file with `key = value` lines (flags override it).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    input_dim: Option<usize>,
    #[arg(long)]
    text_dim: Option<usize>,
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    eval_per_class: Option<usize>,
    #[arg(long)]
    sep: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output dataset path.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen_data(args: GenDataArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let d = SyntheticSpec::default();
    let spec = SyntheticSpec {
        num_classes: args.classes.or(file.take("classes")?).unwrap_or(d.num_classes),
        input_dim: args.input_dim.or(file.take("input_dim")?).unwrap_or(d.input_dim),
        text_dim: args.text_dim.or(file.take("text_dim")?).unwrap_or(d.text_dim),
        train_per_class: args
            .train_per_class
            .or(file.take("train_per_class")?)
            .unwrap_or(d.train_per_class),
        eval_per_class: args
            .eval_per_class
            .or(file.take("eval_per_class")?)
            .unwrap_or(d.eval_per_class),
        class_sep: args.sep.or(file.take("sep")?).unwrap_or(d.class_sep),
        noise_std: args.noise.or(file.take("noise")?).unwrap_or(d.noise_std),
        seed: args.seed.or(file.take("seed")?).unwrap_or(d.seed),
    };
    file.finish()?;
    spec.validate().map_err(CliError::from)?;

    let mut manifest = RunManifest::new("gen-data");
    manifest.push("classes", spec.num_classes);
    manifest.push("input_dim", spec.input_dim);
    manifest.push("text_dim", spec.text_dim);
    manifest.push("train_per_class", spec.train_per_class);
    manifest.push("eval_per_class", spec.eval_per_class);
    manifest.push("sep", spec.class_sep);
    manifest.push("noise", spec.noise_std);
    manifest.push("seed", spec.seed);
    manifest.push("out", args.out.display());
    manifest.write(&manifest_path(&args.out)).map_err(CliError::from)?;

    let ds = data::generate(&spec).map_err(CliError::from)?;
    data::save(&ds, &args.out).map_err(CliError::from)?;
    println!("wrote dataset with {} classes to {}", spec.num_classes, args.out.display());
    Ok(())
}

#[derive(Args)]
struct PretrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dataset path.
    #[arg(long)]
    data: PathBuf,
    /// Output checkpoint path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// Length of the per-class pretraining domain offset.
    #[arg(long)]
    shift: Option<f64>,
}

fn cmd_pretrain(args: PretrainArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let d = PretrainConfig::default();
    let cfg = PretrainConfig {
        lr: args.lr.or(file.take("lr")?).unwrap_or(d.lr),
        epochs: args.epochs.or(file.take("epochs")?).unwrap_or(d.epochs),
        batch_size: args.batch.or(file.take("batch")?).unwrap_or(d.batch_size),
        seed: args.seed.or(file.take("seed")?).unwrap_or(d.seed),
        dims: d.dims,
        tau: args.tau.or(file.take("tau")?).unwrap_or(d.tau),
        domain_shift: args.shift.or(file.take("shift")?).unwrap_or(d.domain_shift),
    };
    file.finish()?;
    cfg.validate().map_err(CliError::from)?;

    let mut manifest = RunManifest::new("pretrain");
    manifest.push("data", args.data.display());
    manifest.push("out", args.out.display());
    manifest.push("seed", cfg.seed);
    manifest.push("lr", cfg.lr);
    manifest.push("epochs", cfg.epochs);
    manifest.push("batch", cfg.batch_size);
    manifest.push("tau", cfg.tau);
    manifest.push("shift", cfg.domain_shift);
    manifest.write(&manifest_path(&args.out)).map_err(CliError::from)?;

    let ds = data::load(&args.data).map_err(CliError::from)?;
    let model = pretrain_zero_shot(&ds, &cfg).map_err(CliError::from)?;
    checkpoint::save(&model, &args.out).map_err(CliError::from)?;

    let base = ds.base_eval();
    let novel = ds.novel_eval();
    let all: Vec<usize> = (0..ds.spec.num_classes).collect();
    let base_acc = evaluate(&model, &base.features, &base.labels, &ds.class_embeddings, &ds.base_classes())?;
    let novel_acc = evaluate(&model, &novel.features, &novel.labels, &ds.class_embeddings, &ds.novel_classes())?;
    let all_acc = evaluate(&model, &ds.eval.features, &ds.eval.labels, &ds.class_embeddings, &all)?;
    println!("zero-shot base_acc = {base_acc:.6}");
    println!("zero-shot novel_acc = {novel_acc:.6}");
    println!("zero-shot all_acc = {all_acc:.6}");
    println!("wrote checkpoint to {}", args.out.display());
    Ok(())
}

#[derive(Args, Clone)]
struct TrainFlags {
    #[arg(long)]
    constraint: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    cost: Option<String>,
    /// Transport solver: `exact` or `sinkhorn`.
    #[arg(long)]
    solver: Option<String>,
    /// Sinkhorn regularization as a fraction of the mean cost.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    sinkhorn_iters: Option<usize>,
    #[arg(long)]
    sinkhorn_tol: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl TrainFlags {
    fn resolve(&self, file: &mut FileConfig) -> Result<TrainConfig, CliError> {
        let d = TrainConfig::default();
        let constraint_s: Option<String> = self.constraint.clone().or(file.take("constraint")?);
        let constraint = match constraint_s {
            None => d.constraint,
            Some(s) => ConstraintKind::parse(&s)
                .ok_or_else(|| CliError::usage(format!("unknown constraint `{s}`")))?,
        };
        let cost_s: Option<String> = self.cost.clone().or(file.take("cost")?);
        let cost = match cost_s {
            None => d.cost,
            Some(s) => CostKind::parse(&s)
                .ok_or_else(|| CliError::usage(format!("unknown cost `{s}`")))?,
        };
        let epsilon = self.epsilon.or(file.take("epsilon")?).unwrap_or(0.05);
        let iters = self.sinkhorn_iters.or(file.take("sinkhorn_iters")?).unwrap_or(1000);
        let tol = self.sinkhorn_tol.or(file.take("sinkhorn_tol")?).unwrap_or(1e-8);
        let solver_s: Option<String> = self.solver.clone().or(file.take("solver")?);
        let solver = match solver_s.as_deref() {
            None | Some("sinkhorn") => Solver::Sinkhorn(SinkhornConfig {
                epsilon: SinkhornEpsilon::MeanScaled(epsilon),
                max_iters: iters,
                tol,
            }),
            Some("exact") => Solver::Exact,
            Some(s) => return Err(CliError::usage(format!("unknown solver `{s}`"))),
        };
        Ok(TrainConfig {
            lr: self.lr.or(file.take("lr")?).unwrap_or(d.lr),
            epochs: self.epochs.or(file.take("epochs")?).unwrap_or(d.epochs),
            batch_size: self.batch.or(file.take("batch")?).unwrap_or(d.batch_size),
            lambda: self.lambda.or(file.take("lambda")?).unwrap_or(d.lambda),
            constraint,
            cost,
            solver,
            seed: self.seed.or(file.take("seed")?).unwrap_or(d.seed),
        })
    }

    fn manifest(cfg: &TrainConfig, manifest: &mut RunManifest) {
        manifest.push("constraint", cfg.constraint.slug());
        manifest.push("lambda", cfg.lambda);
        manifest.push("cost", cfg.cost.slug());
        manifest.push("solver", cfg.solver.slug());
        if let Solver::Sinkhorn(sc) = &cfg.solver {
            let (SinkhornEpsilon::MeanScaled(e) | SinkhornEpsilon::Absolute(e)) = sc.epsilon;
            manifest.push("epsilon", e);
            manifest.push("sinkhorn_iters", sc.max_iters);
            manifest.push("sinkhorn_tol", sc.tol);
        }
        manifest.push("epochs", cfg.epochs);
        manifest.push("lr", cfg.lr);
        manifest.push("batch", cfg.batch_size);
        manifest.push("seed", cfg.seed);
    }
}

#[derive(Args)]
struct AdaptArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dataset path.
    #[arg(long)]
    data: PathBuf,
    /// Pretrained checkpoint path.
    #[arg(long)]
    model: PathBuf,
    /// Output metrics CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
}

fn cmd_adapt(args: AdaptArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let cfg = args.train.resolve(&mut file)?;
    file.finish()?;
    cfg.validate().map_err(CliError::from)?;

    let mut manifest = RunManifest::new("adapt");
    manifest.push("data", args.data.display());
    manifest.push("model", args.model.display());
    manifest.push("out", args.out.display());
    TrainFlags::manifest(&cfg, &mut manifest);
    manifest.write(&manifest_path(&args.out)).map_err(CliError::from)?;

    let ds = data::load(&args.data).map_err(CliError::from)?;
    let mut model: ModelPair = checkpoint::load(&args.model).map_err(CliError::from)?;
    let record = adapt(&mut model, &ds, &cfg).map_err(CliError::from)?;
    write_file(&args.out, &record.to_csv())?;

    let last = record.final_row();
    println!(
        "final epoch {}: base_acc = {:.6} novel_acc = {:.6} hm = {:.6}",
        last.epoch, last.base_acc, last.novel_acc, last.hm
    );
    println!("wrote run record to {}", args.out.display());
    Ok(())
}

#[derive(Args)]
struct CheckLemma2Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_check_lemma2(args: CheckLemma2Args) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let trials = args.trials.or(file.take("trials")?).unwrap_or(1000);
    let seed = args.seed.or(file.take("seed")?).unwrap_or(0);
    file.finish()?;

    let report = check_lemma2(trials, seed).map_err(CliError::from)?;
    let text = format!(
        "trials = {}\nviolations = {}\nmax_gap = {:.6}\nmin_gap = {:.6}\n",
        report.trials, report.violations, report.max_gap, report.min_gap
    );
    print!("{text}");
    if let Some(out) = &args.out {
        write_file(out, &text)?;
        let mut manifest = RunManifest::new("check-lemma2");
        manifest.push("trials", trials);
        manifest.push("seed", seed);
        manifest.push("out", out.display());
        manifest.write(&manifest_path(out)).map_err(CliError::from)?;
    }
    if report.violations > 0 {
        return Err(CliError::runtime(format!(
            "transport bound violated {} times",
            report.violations
        )));
    }
    Ok(())
}

/// Default dataset and zero-shot model used by experiment commands when
/// no `--data`/`--model` is given.
fn default_experiment_inputs(
    data: &Option<PathBuf>,
    model: &Option<PathBuf>,
) -> Result<(SplitDataset, ModelPair), CliError> {
    let ds = match data {
        Some(p) => data::load(p).map_err(CliError::from)?,
        None => data::generate(&SyntheticSpec::default()).map_err(CliError::from)?,
    };
    let model = match model {
        Some(p) => checkpoint::load(p).map_err(CliError::from)?,
        None => pretrain_zero_shot(&ds, &PretrainConfig::default()).map_err(CliError::from)?,
    };
    Ok((ds, model))
}

#[derive(Args)]
struct FeasibleSetArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    prompt_std: Option<f64>,
    /// Constraint level; omitted means auto-calibrated to ~20% point-wise
    /// occupancy.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Optional per-sample CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_feasible_set(args: FeasibleSetArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let opts = FeasibleSetOptions {
        num_samples: args.samples.or(file.take("samples")?).unwrap_or(10_000),
        prompt_std: args.prompt_std.or(file.take("prompt_std")?).unwrap_or(0.3),
        epsilon: args.epsilon.or(file.take("epsilon")?),
        seed: args.seed.or(file.take("seed")?).unwrap_or(0),
    };
    file.finish()?;

    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("feasible-set");
        manifest.push("samples", opts.num_samples);
        manifest.push("prompt_std", opts.prompt_std);
        if let Some(e) = opts.epsilon {
            manifest.push("epsilon", e);
        }
        manifest.push("seed", opts.seed);
        manifest.push("out", out.display());
        manifest.write(&manifest_path(out)).map_err(CliError::from)?;
    }

    let (ds, model) = default_experiment_inputs(&args.data, &args.model)?;
    let report = feasible_set_experiment(&model, &ds, &opts).map_err(CliError::from)?;
    println!("epsilon = {:.6}", report.epsilon);
    println!("num_samples = {}", report.num_samples);
    println!("count_pw = {}", report.count_pw);
    println!("count_ot = {}", report.count_ot);
    println!("violations = {}", report.violations);
    if let Some(out) = &args.out {
        write_file(out, &report.to_csv())?;
        println!("wrote per-sample losses to {}", out.display());
    }
    if report.violations > 0 {
        return Err(CliError::runtime(format!(
            "feasible-set inclusion violated {} times",
            report.violations
        )));
    }
    Ok(())
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("invalid {what} `{tok}`")))
        })
        .collect()
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated regularization strengths.
    #[arg(long)]
    lambdas: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
}

fn cmd_sweep_lambda(args: SweepArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let lambdas_s = args.lambdas.clone().or(file.take("lambdas")?);
    let seeds_s = args.seeds.clone().or(file.take("seeds")?);
    let cfg = args.train.resolve(&mut file)?;
    file.finish()?;
    cfg.validate().map_err(CliError::from)?;
    let lambdas: Vec<f64> = parse_list(
        lambdas_s.as_deref().unwrap_or("0,0.1,1,10,100,1000"),
        "lambda",
    )?;
    let seeds: Vec<u64> = parse_list(seeds_s.as_deref().unwrap_or("0,1,2,3,4"), "seed")?;
    if lambdas.iter().any(|&l| l < 0.0) {
        return Err(CliError::usage("lambdas must be nonnegative"));
    }

    let mut manifest = RunManifest::new("sweep-lambda");
    manifest.push("lambdas", lambdas_s.as_deref().unwrap_or("0,0.1,1,10,100,1000"));
    manifest.push("seeds", seeds_s.as_deref().unwrap_or("0,1,2,3,4"));
    manifest.push("out", args.out.display());
    TrainFlags::manifest(&cfg, &mut manifest);
    manifest.write(&manifest_path(&args.out)).map_err(CliError::from)?;

    let (ds, _) = default_experiment_inputs(&args.data, &None)?;
    let rows = lambda_sweep(&ds, &lambdas, &seeds, &cfg, &PretrainConfig::default())
        .map_err(CliError::from)?;
    write_file(&args.out, &sweep_rows_to_csv(&rows))?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated constraint kinds.
    #[arg(long)]
    kinds: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mut file = FileConfig::load(&args.config)?;
    let kinds_s = args.kinds.clone().or(file.take("kinds")?);
    let seeds_s = args.seeds.clone().or(file.take("seeds")?);
    let cfg = args.train.resolve(&mut file)?;
    file.finish()?;
    cfg.validate().map_err(CliError::from)?;

    let kinds_str = kinds_s
        .as_deref()
        .unwrap_or("none,l2,l1,cos,sep-ot,joint-ot,ot-vision,ot-text");
    let kinds: Vec<ConstraintKind> = kinds_str
        .split(',')
        .map(|tok| {
            ConstraintKind::parse(tok.trim())
                .ok_or_else(|| CliError::usage(format!("unknown constraint `{tok}`")))
        })
        .collect::<Result<_, _>>()?;
    let seeds: Vec<u64> = parse_list(seeds_s.as_deref().unwrap_or("0,1,2,3,4"), "seed")?;

    let mut manifest = RunManifest::new("compare");
    manifest.push("kinds", kinds_str);
    manifest.push("seeds", seeds_s.as_deref().unwrap_or("0,1,2,3,4"));
    manifest.push("out", args.out.display());
    TrainFlags::manifest(&cfg, &mut manifest);
    manifest.write(&manifest_path(&args.out)).map_err(CliError::from)?;

    let (ds, _) = default_experiment_inputs(&args.data, &None)?;
    let rows = compare_constraints(&ds, &kinds, &seeds, &cfg, &PretrainConfig::default())
        .map_err(CliError::from)?;
    write_file(&args.out, &compare_rows_to_csv(&rows))?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

pub fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        use clap::error::ErrorKind;
        let code = match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 2,
        };
        CliError { code, msg: e.to_string() }
    })?;
    match cli.cmd {
        Cmd::GenData(a) => cmd_gen_data(a),
        Cmd::Pretrain(a) => cmd_pretrain(a),
        Cmd::Adapt(a) => cmd_adapt(a),
        Cmd::CheckLemma2(a) => cmd_check_lemma2(a),
        Cmd::FeasibleSet(a) => cmd_feasible_set(a),
        Cmd::SweepLambda(a) => cmd_sweep_lambda(a),
        Cmd::Compare(a) => cmd_compare(a),
    }
}
