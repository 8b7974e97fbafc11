//! Model checkpoint format `checkpoint v1`.
//!
//! UTF-8 text with named sections; floats use the shortest round-trip
//! representation so save/load (and re-saving) is byte-stable:
//!
//! ```text
//! # checkpoint v1 seed=<u64>
//! tau = <f64>
//! input_dim = <usize>      text_dim, prompt_dim, hidden_dim, embed_dim likewise
//! [vision.w1]              rows of comma-separated f64, hidden x (input_dim + prompt_dim)
//! [vision.w2]              embed_dim x hidden
//! [text.w1]                hidden x (text_dim + prompt_dim)
//! [text.w2]                embed_dim x hidden
//! [prompt.adapted.vision]  one row, prompt_dim values
//! [prompt.adapted.text]
//! [prompt.zero_shot.vision]
//! [prompt.zero_shot.text]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use otlab_kernel::Matrix;

use crate::encoder::EncoderWeights;
use crate::error::ModelError;
use crate::pair::{ModelDims, ModelPair, PromptParams};

pub fn to_string(model: &ModelPair) -> String {
    let mut out = String::new();
    let d = &model.dims;
    let _ = writeln!(out, "# checkpoint v1 seed={}", model.seed);
    let _ = writeln!(out, "tau = {}", model.tau);
    let _ = writeln!(out, "input_dim = {}", d.input_dim);
    let _ = writeln!(out, "text_dim = {}", d.text_dim);
    let _ = writeln!(out, "prompt_dim = {}", d.prompt_dim);
    let _ = writeln!(out, "hidden_dim = {}", d.hidden_dim);
    let _ = writeln!(out, "embed_dim = {}", d.embed_dim);
    let sections: [(&str, &Matrix); 4] = [
        ("vision.w1", &model.vision.w1),
        ("vision.w2", &model.vision.w2),
        ("text.w1", &model.text.w1),
        ("text.w2", &model.text.w2),
    ];
    for (name, m) in sections {
        let _ = writeln!(out, "[{name}]");
        for i in 0..m.rows() {
            let _ = writeln!(out, "{}", fmt_row(m.row(i)));
        }
    }
    let prompts: [(&str, &[f64]); 4] = [
        ("prompt.adapted.vision", &model.prompts.vision),
        ("prompt.adapted.text", &model.prompts.text),
        ("prompt.zero_shot.vision", &model.zs_prompts.vision),
        ("prompt.zero_shot.text", &model.zs_prompts.text),
    ];
    for (name, row) in prompts {
        let _ = writeln!(out, "[{name}]");
        let _ = writeln!(out, "{}", fmt_row(row));
    }
    out
}

pub fn save(model: &ModelPair, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, to_string(model))
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<ModelPair, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    from_str(&text)
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

pub fn from_str(text: &str) -> Result<ModelPair, ModelError> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, &str), ModelError> {
        lines.next().ok_or_else(|| ModelError::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    };

    let (ln, header) = next("header")?;
    let seed = header
        .strip_prefix("# checkpoint v1 seed=")
        .and_then(|s| s.trim().parse::<u64>().ok())
        .ok_or_else(|| ModelError::Parse {
            line: ln + 1,
            msg: "expected header `# checkpoint v1 seed=<u64>`".into(),
        })?;

    let mut grab = |key: &str| -> Result<f64, ModelError> {
        let (ln, line) = next(key)?;
        let (k, v) = line.split_once('=').ok_or_else(|| ModelError::Parse {
            line: ln + 1,
            msg: format!("expected `{key} = <value>`"),
        })?;
        if k.trim() != key {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("expected key `{key}`, found `{}`", k.trim()),
            });
        }
        v.trim().parse::<f64>().map_err(|_| ModelError::Parse {
            line: ln + 1,
            msg: format!("invalid number `{}`", v.trim()),
        })
    };

    let tau = grab("tau")?;
    let dims = ModelDims {
        input_dim: grab("input_dim")? as usize,
        text_dim: grab("text_dim")? as usize,
        prompt_dim: grab("prompt_dim")? as usize,
        hidden_dim: grab("hidden_dim")? as usize,
        embed_dim: grab("embed_dim")? as usize,
    };

    let mut read_matrix = |name: &str, rows: usize, cols: usize| -> Result<Matrix, ModelError> {
        let (ln, line) = next(name)?;
        if line.trim() != format!("[{name}]") {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("expected section `[{name}]`, found `{line}`"),
            });
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let (ln, line) = next("matrix row")?;
            let vals: Result<Vec<f64>, ModelError> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| ModelError::Parse {
                        line: ln + 1,
                        msg: format!("invalid number `{}`", tok.trim()),
                    })
                })
                .collect();
            let vals = vals?;
            if vals.len() != cols {
                return Err(ModelError::Parse {
                    line: ln + 1,
                    msg: format!("expected {cols} values, got {}", vals.len()),
                });
            }
            m.row_mut(i).copy_from_slice(&vals);
        }
        Ok(m)
    };

    let vision = EncoderWeights {
        w1: read_matrix("vision.w1", dims.hidden_dim, dims.input_dim + dims.prompt_dim)?,
        w2: read_matrix("vision.w2", dims.embed_dim, dims.hidden_dim)?,
    };
    let text_enc = EncoderWeights {
        w1: read_matrix("text.w1", dims.hidden_dim, dims.text_dim + dims.prompt_dim)?,
        w2: read_matrix("text.w2", dims.embed_dim, dims.hidden_dim)?,
    };
    let adapted_vision = read_matrix("prompt.adapted.vision", 1, dims.prompt_dim)?;
    let adapted_text = read_matrix("prompt.adapted.text", 1, dims.prompt_dim)?;
    let zs_vision = read_matrix("prompt.zero_shot.vision", 1, dims.prompt_dim)?;
    let zs_text = read_matrix("prompt.zero_shot.text", 1, dims.prompt_dim)?;

    if let Some((ln, line)) = lines.next() {
        if !line.trim().is_empty() {
            return Err(ModelError::Parse {
                line: ln + 1,
                msg: format!("unexpected trailing content `{line}`"),
            });
        }
    }

    Ok(ModelPair {
        dims,
        vision,
        text: text_enc,
        prompts: PromptParams {
            vision: adapted_vision.row(0).to_vec(),
            text: adapted_text.row(0).to_vec(),
        },
        zs_prompts: PromptParams {
            vision: zs_vision.row(0).to_vec(),
            text: zs_text.row(0).to_vec(),
        },
        tau,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use otlab_kernel::Rng;

    fn sample_model() -> ModelPair {
        let dims = ModelDims {
            input_dim: 3,
            text_dim: 2,
            prompt_dim: 2,
            hidden_dim: 4,
            embed_dim: 3,
        };
        let mut rng = Rng::new(9);
        ModelPair {
            dims,
            vision: EncoderWeights {
                w1: rng.gaussian_matrix(4, 5, 1.0),
                w2: rng.gaussian_matrix(3, 4, 1.0),
            },
            text: EncoderWeights {
                w1: rng.gaussian_matrix(4, 4, 1.0),
                w2: rng.gaussian_matrix(3, 4, 1.0),
            },
            prompts: PromptParams {
                vision: vec![0.1, -0.2],
                text: vec![0.3, 0.4],
            },
            zs_prompts: PromptParams {
                vision: vec![0.0, 0.5],
                text: vec![0.3, 0.4],
            },
            tau: 0.01,
            seed: 7,
        }
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let model = sample_model();
        let text = to_string(&model);
        let back = from_str(&text).unwrap();
        assert_eq!(model, back);
        assert_eq!(text, to_string(&back));
    }

    #[test]
    fn truncation_is_parse_error() {
        let text = to_string(&sample_model());
        let cut = &text[..text.len() - 40];
        assert!(matches!(from_str(cut), Err(ModelError::Parse { .. })));
    }

    #[test]
    fn missing_path_is_io_error() {
        assert!(matches!(
            load(Path::new("/nonexistent/model.ckpt")),
            Err(ModelError::Io(_))
        ));
    }
}
