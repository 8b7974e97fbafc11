use std::fmt::Write as _;
use std::path::Path;

use crate::error::LabError;

/// Parse a `key = value` config file: one pair per line, `#` comments,
/// UTF-8. Returns `(key, value, line_number)` triples; validation of the
/// keys themselves is the caller's job (unknown keys fail closed there).
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String, usize)>, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| LabError::Config(format!(
            "{}:{}: expected `key = value`, found `{raw}`",
            path.display(),
            idx + 1
        )))?;
        let key = k.trim();
        let value = v.trim();
        if key.is_empty() || value.is_empty() {
            return Err(LabError::Config(format!(
                "{}:{}: empty key or value",
                path.display(),
                idx + 1
            )));
        }
        pairs.push((key.to_string(), value.to_string(), idx + 1));
    }
    Ok(pairs)
}

/// Replay manifest: the command, tool version, and the fully resolved
/// configuration, written before any long computation starts. The file is
/// itself valid config-file syntax.
pub struct RunManifest {
    pub command: String,
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# otlab run manifest");
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        std::fs::write(path, self.to_string())
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
    }
}
