//! Model file reading and writing.
//!
//! A model file is a JSON document with the keys `meta`, `competencies`,
//! `components`, `relation_types`, `edges` and `layers`. Strict loading
//! rejects any key the model types do not define; lax loading ignores them.

use std::fs;
use std::io::Write;
use std::path::Path;

use archgraph_core::CbmModel;
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParseMode {
    #[default]
    Strict,
    Lax,
}

impl ParseMode {
    pub fn lax(lax: bool) -> Self {
        if lax {
            Self::Lax
        } else {
            Self::Strict
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PersistError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown key `{key}` (use --lax to ignore unknown keys)")]
    UnknownKey { key: String },
}

/// Deserializes `text` as `T`, reporting unknown keys in strict mode.
pub fn parse_document<T: DeserializeOwned>(text: &str, mode: ParseMode) -> Result<T, PersistError> {
    let mut ignored = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_ignored::deserialize(&mut de, |path| ignored.push(path.to_string()))
        .and_then(|v| de.end().map(|()| v))
        .map_err(|e| PersistError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
    if mode == ParseMode::Strict {
        if let Some(key) = ignored.into_iter().next() {
            return Err(PersistError::UnknownKey { key });
        }
    }
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

pub fn from_str(text: &str, mode: ParseMode) -> Result<CbmModel, PersistError> {
    parse_document(text, mode)
}

pub fn to_string(model: &CbmModel) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("model serializes");
    s.push('\n');
    s
}

pub fn load(path: &Path, mode: ParseMode) -> Result<CbmModel, PersistError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, &e))?;
    from_str(&text, mode)
}

/// Writes to a temporary sibling of `path`, then renames it into place.
pub fn save(model: &CbmModel, path: &Path) -> Result<(), PersistError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path.file_name().ok_or_else(|| PersistError::Io {
        path: path.display().to_string(),
        reason: "not a file path".into(),
    })?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_error(&tmp, &e))?;
    f.write_all(to_string(model).as_bytes()).map_err(|e| io_error(&tmp, &e))?;
    f.sync_all().map_err(|e| io_error(&tmp, &e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, &e))
}

fn io_error(path: &Path, e: &std::io::Error) -> PersistError {
    PersistError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}
