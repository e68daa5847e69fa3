//! Plant model files: one `key = value` line per matrix, rows separated by
//! `;` and entries by whitespace, e.g. `D = 3 5; -1 0`. Blank lines and
//! `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use msfnet_core::model::PlantModel;
use msfnet_core::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}` (expected one of D, R, H, K, L)")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: {msg}")]
    Value { line: usize, msg: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Model(#[from] msfnet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const KEYS: [&str; 5] = ["D", "R", "H", "K", "L"];

/// Parses `1 2; 3 4` into a matrix.
pub fn parse_matrix(text: &str) -> Result<Matrix, String> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| format!("`{tok}` is not a number"))
                        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("`{tok}` is not finite")) })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if rows.iter().any(Vec::is_empty) {
        return Err("empty matrix row".into());
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn format_matrix(m: &Matrix) -> String {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn parse_model(text: &str) -> Result<PlantModel, ConfigError> {
    let mut found: BTreeMap<&'static str, Matrix> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim();
        let Some(&canonical) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if found.contains_key(canonical) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        let m = parse_matrix(value).map_err(|msg| ConfigError::Value { line, msg })?;
        found.insert(canonical, m);
    }
    let mut take = |k: &'static str| found.remove(k).ok_or(ConfigError::Missing(k));
    let (d, r, h, k, l) = (take("D")?, take("R")?, take("H")?, take("K")?, take("L")?);
    Ok(PlantModel::new(d, r, h, k, l)?)
}

pub fn format_model(model: &PlantModel) -> String {
    let mut out = String::new();
    for (key, m) in [
        ("D", model.d()),
        ("R", model.r()),
        ("H", model.h()),
        ("K", model.k()),
        ("L", model.l()),
    ] {
        let _ = writeln!(out, "{key} = {}", format_matrix(m));
    }
    out
}

pub fn load_model(path: &Path) -> Result<PlantModel, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}
