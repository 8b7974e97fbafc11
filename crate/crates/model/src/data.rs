use std::fmt::Write as _;
use std::path::Path;

use otlab_kernel::{Matrix, Rng};

use crate::error::ModelError;

/// Fixed per-class input vectors standing in for tokenized class-name
/// prompts. Rows are drawn once at dataset creation and never change.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEmbeddings {
    matrix: Matrix,
}

impl ClassEmbeddings {
    pub fn new(matrix: Matrix) -> Result<Self, ModelError> {
        for a in 0..matrix.rows() {
            for b in (a + 1)..matrix.rows() {
                if matrix.row(a) == matrix.row(b) {
                    return Err(ModelError::Config(format!(
                        "class embeddings {a} and {b} are identical"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn num_classes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Embedding rows for the given classes, in `class_set` order.
    pub fn rows_for(&self, class_set: &[usize]) -> Result<Matrix, ModelError> {
        for &c in class_set {
            if c >= self.num_classes() {
                return Err(ModelError::Config(format!(
                    "class {c} out of range ({} classes)",
                    self.num_classes()
                )));
            }
        }
        Ok(self.matrix.take_rows(class_set))
    }
}

/// Configuration of the synthetic classification task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    /// Total number of classes; must be even for the clean half split.
    pub num_classes: usize,
    pub input_dim: usize,
    pub text_dim: usize,
    pub train_per_class: usize,
    pub eval_per_class: usize,
    /// Scale of the class prototypes.
    pub class_sep: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_classes: 8,
            input_dim: 16,
            text_dim: 8,
            train_per_class: 20,
            eval_per_class: 50,
            class_sep: 1.0,
            noise_std: 0.35,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_classes < 2 || self.num_classes % 2 != 0 {
            return Err(ModelError::Config(format!(
                "num_classes must be even and at least 2, got {}",
                self.num_classes
            )));
        }
        if self.input_dim == 0 || self.text_dim == 0 {
            return Err(ModelError::Config("feature dims must be positive".into()));
        }
        if self.train_per_class == 0 || self.eval_per_class == 0 {
            return Err(ModelError::Config("samples per class must be positive".into()));
        }
        if self.noise_std < 0.0 || self.class_sep < 0.0 {
            return Err(ModelError::Config("noise_std and class_sep must be >= 0".into()));
        }
        Ok(())
    }
}

/// Labeled feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: Matrix,
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows whose label falls in `[lo, hi)`.
    pub fn filter_classes(&self, lo: usize, hi: usize) -> LabeledSet {
        let idx: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= lo && l < hi)
            .map(|(i, _)| i)
            .collect();
        LabeledSet {
            features: self.features.take_rows(&idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Synthetic dataset with the base/novel class split.
///
/// Training rows cover all classes (pretraining consumes every class);
/// adaptation filters to the base half, evaluation to the relevant half.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub spec: SyntheticSpec,
    pub class_embeddings: ClassEmbeddings,
    pub train: LabeledSet,
    pub eval: LabeledSet,
}

impl SplitDataset {
    /// Classes `[0, C/2)`.
    pub fn base_classes(&self) -> Vec<usize> {
        (0..self.spec.num_classes / 2).collect()
    }

    /// Classes `[C/2, C)`.
    pub fn novel_classes(&self) -> Vec<usize> {
        (self.spec.num_classes / 2..self.spec.num_classes).collect()
    }

    pub fn base_train(&self) -> LabeledSet {
        self.train.filter_classes(0, self.spec.num_classes / 2)
    }

    pub fn novel_train(&self) -> LabeledSet {
        self.train
            .filter_classes(self.spec.num_classes / 2, self.spec.num_classes)
    }

    pub fn base_eval(&self) -> LabeledSet {
        self.eval.filter_classes(0, self.spec.num_classes / 2)
    }

    pub fn novel_eval(&self) -> LabeledSet {
        self.eval
            .filter_classes(self.spec.num_classes / 2, self.spec.num_classes)
    }
}

/// Generate a dataset: class prototypes from `N(0, class_sep^2 I)`,
/// samples as `prototype + N(0, noise_std^2 I)`, class embeddings from
/// `N(0, I)`. Deterministic in the seed.
pub fn generate(spec: &SyntheticSpec) -> Result<SplitDataset, ModelError> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let prototypes = rng.gaussian_matrix(spec.num_classes, spec.input_dim, spec.class_sep);
    let class_embeddings =
        ClassEmbeddings::new(rng.gaussian_matrix(spec.num_classes, spec.text_dim, 1.0))?;

    let sample_set = |per_class: usize, rng: &mut Rng| -> LabeledSet {
        let mut features = Matrix::zeros(spec.num_classes * per_class, spec.input_dim);
        let mut labels = Vec::with_capacity(spec.num_classes * per_class);
        let mut r = 0;
        for c in 0..spec.num_classes {
            for _ in 0..per_class {
                let noise = rng.gaussian_matrix(1, spec.input_dim, spec.noise_std);
                for j in 0..spec.input_dim {
                    features.set(r, j, prototypes.get(c, j) + noise.get(0, j));
                }
                labels.push(c);
                r += 1;
            }
        }
        LabeledSet { features, labels }
    };

    let train = sample_set(spec.train_per_class, &mut rng);
    let eval = sample_set(spec.eval_per_class, &mut rng);

    Ok(SplitDataset {
        spec: *spec,
        class_embeddings,
        train,
        eval,
    })
}

fn fmt_row(row: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

/// Serialize to the `synth v1` text format. Floats use the shortest
/// round-trip representation, so save/load is bit-identical.
pub fn to_string(ds: &SplitDataset) -> String {
    let spec = &ds.spec;
    let mut out = String::new();
    let _ = writeln!(out, "# synth v1 seed={}", spec.seed);
    let _ = writeln!(out, "classes = {}", spec.num_classes);
    let _ = writeln!(out, "input_dim = {}", spec.input_dim);
    let _ = writeln!(out, "text_dim = {}", spec.text_dim);
    let _ = writeln!(out, "train_per_class = {}", spec.train_per_class);
    let _ = writeln!(out, "eval_per_class = {}", spec.eval_per_class);
    let _ = writeln!(out, "class_sep = {}", spec.class_sep);
    let _ = writeln!(out, "noise_std = {}", spec.noise_std);
    let _ = writeln!(out, "[class_embeddings]");
    for i in 0..ds.class_embeddings.num_classes() {
        let _ = writeln!(out, "{}", fmt_row(ds.class_embeddings.matrix().row(i)));
    }
    for (name, set) in [("train", &ds.train), ("eval", &ds.eval)] {
        let _ = writeln!(out, "[{name}]");
        for i in 0..set.len() {
            let _ = writeln!(out, "{},{}", set.labels[i], fmt_row(set.features.row(i)));
        }
    }
    out
}

pub fn save(ds: &SplitDataset, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, to_string(ds))
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<SplitDataset, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    from_str(&text)
}

struct LineParser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    peeked: Option<(usize, &'a str)>,
}

impl<'a> LineParser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            peeked: None,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.peeked.take().or_else(|| self.lines.next())
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), ModelError> {
        self.next().ok_or_else(|| ModelError::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_kv(line: &str, lineno: usize, key: &str) -> Result<f64, ModelError> {
    let (k, v) = line.split_once('=').ok_or_else(|| ModelError::Parse {
        line: lineno,
        msg: format!("expected `{key} = <value>`"),
    })?;
    if k.trim() != key {
        return Err(ModelError::Parse {
            line: lineno,
            msg: format!("expected key `{key}`, found `{}`", k.trim()),
        });
    }
    v.trim().parse::<f64>().map_err(|_| ModelError::Parse {
        line: lineno,
        msg: format!("invalid number `{}`", v.trim()),
    })
}

fn parse_floats(line: &str, lineno: usize) -> Result<Vec<f64>, ModelError> {
    line.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| ModelError::Parse {
                line: lineno,
                msg: format!("invalid number `{}`", tok.trim()),
            })
        })
        .collect()
}

/// Parse the `synth v1` format. Fail-closed: wrong counts, unknown keys,
/// or truncation are parse errors with a line number.
pub fn from_str(text: &str) -> Result<SplitDataset, ModelError> {
    let mut p = LineParser::new(text);

    let (ln, header) = p.expect("header")?;
    let seed = header
        .strip_prefix("# synth v1 seed=")
        .and_then(|s| s.trim().parse::<u64>().ok())
        .ok_or_else(|| ModelError::Parse {
            line: ln + 1,
            msg: "expected header `# synth v1 seed=<u64>`".into(),
        })?;

    let mut grab = |key: &str| -> Result<f64, ModelError> {
        let (ln, line) = p.expect(key)?;
        parse_kv(line, ln + 1, key)
    };
    let spec = SyntheticSpec {
        num_classes: grab("classes")? as usize,
        input_dim: grab("input_dim")? as usize,
        text_dim: grab("text_dim")? as usize,
        train_per_class: grab("train_per_class")? as usize,
        eval_per_class: grab("eval_per_class")? as usize,
        class_sep: grab("class_sep")?,
        noise_std: grab("noise_std")?,
        seed,
    };
    spec.validate()?;

    let expect_section = |p: &mut LineParser, name: &str| -> Result<(), ModelError> {
        let (ln, line) = p.expect(&format!("section [{name}]"))?;
        if line.trim() != format!("[{name}]") {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("expected section `[{name}]`, found `{line}`"),
            });
        }
        Ok(())
    };

    expect_section(&mut p, "class_embeddings")?;
    let mut emb = Matrix::zeros(spec.num_classes, spec.text_dim);
    for i in 0..spec.num_classes {
        let (ln, line) = p.expect("class embedding row")?;
        let vals = parse_floats(line, ln + 1)?;
        if vals.len() != spec.text_dim {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("expected {} values, got {}", spec.text_dim, vals.len()),
            });
        }
        emb.row_mut(i).copy_from_slice(&vals);
    }

    let read_set = |p: &mut LineParser, name: &str, per_class: usize| -> Result<LabeledSet, ModelError> {
        expect_section(p, name)?;
        let rows = spec.num_classes * per_class;
        let mut features = Matrix::zeros(rows, spec.input_dim);
        let mut labels = Vec::with_capacity(rows);
        for r in 0..rows {
            let (ln, line) = p.expect("labeled row")?;
            let vals = parse_floats(line, ln + 1)?;
            if vals.len() != spec.input_dim + 1 {
                return Err(ModelError::Parse {
                    line: ln + 1,
                    msg: format!(
                        "expected label plus {} features, got {} fields",
                        spec.input_dim,
                        vals.len()
                    ),
                });
            }
            let label = vals[0] as usize;
            if vals[0].fract() != 0.0 || label >= spec.num_classes {
                return Err(ModelError::Parse {
                    line: ln + 1,
                    msg: format!("invalid label `{}`", vals[0]),
                });
            }
            labels.push(label);
            features.row_mut(r).copy_from_slice(&vals[1..]);
        }
        Ok(LabeledSet { features, labels })
    };

    let train = read_set(&mut p, "train", spec.train_per_class)?;
    let eval = read_set(&mut p, "eval", spec.eval_per_class)?;

    if let Some((ln, line)) = p.next() {
        if !line.trim().is_empty() {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("unexpected trailing content `{line}`"),
            });
        }
    }

    Ok(SplitDataset {
        spec,
        class_embeddings: ClassEmbeddings::new(emb)?,
        train,
        eval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_samples_equal_prototypes() {
        let spec = SyntheticSpec {
            noise_std: 0.0,
            train_per_class: 3,
            eval_per_class: 1,
            ..SyntheticSpec::default()
        };
        let ds = generate(&spec).unwrap();
        for i in 1..3 {
            assert_eq!(ds.train.features.row(0), ds.train.features.row(i));
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let spec = SyntheticSpec::default();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn split_counts_match_spec() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        assert_eq!(ds.base_train().len(), 4 * 20);
        assert_eq!(ds.novel_train().len(), 4 * 20);
        assert_eq!(ds.base_eval().len(), 4 * 50);
        assert_eq!(ds.novel_eval().len(), 4 * 50);
    }

    #[test]
    fn split_is_disjoint_and_covering() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        let base: std::collections::BTreeSet<usize> = ds.base_classes().into_iter().collect();
        let novel: std::collections::BTreeSet<usize> = ds.novel_classes().into_iter().collect();
        assert!(base.is_disjoint(&novel));
        assert_eq!(base.len() + novel.len(), ds.spec.num_classes);
        assert!(ds.base_train().labels.iter().all(|l| base.contains(l)));
        assert!(ds.novel_eval().labels.iter().all(|l| novel.contains(l)));
    }

    #[test]
    fn odd_class_count_rejected() {
        let spec = SyntheticSpec {
            num_classes: 7,
            ..SyntheticSpec::default()
        };
        assert!(matches!(generate(&spec), Err(ModelError::Config(_))));
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        let text = to_string(&ds);
        let back = from_str(&text).unwrap();
        assert_eq!(ds, back);
        assert_eq!(text, to_string(&back));
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        let text = to_string(&ds);
        let cut = &text[..text.len() / 2];
        match from_str(cut) {
            Err(ModelError::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        match load(Path::new("/nonexistent/dataset.txt")) {
            Err(ModelError::Io(_)) => {}
            other => panic!("expected io error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_value_reports_line_number() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        let mut text = to_string(&ds);
        text = text.replace("noise_std = 0.35", "noise_std = oops");
        match from_str(&text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
