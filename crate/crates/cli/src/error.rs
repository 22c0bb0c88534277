use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {field}: {message}", path.display())]
    Parse {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Algorithm(#[from] fedsubmax::Error),
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Rewrites a library input error whose message starts with `name:` into
    /// a validation error on `prefix.name`.
    pub fn scoped(prefix: &str, err: fedsubmax::Error) -> Self {
        if let fedsubmax::Error::Input(msg) = &err {
            if let Some((head, rest)) = msg.split_once(':') {
                if !head.is_empty() && head.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return CliError::validation(format!("{prefix}.{head}"), rest.trim());
                }
            }
            return CliError::validation(prefix, msg.clone());
        }
        CliError::Algorithm(err)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Data { .. } => "data",
            CliError::Algorithm(e) => e.kind(),
        }
    }

    /// One JSON object describing the failure.
    pub fn to_record(&self) -> serde_json::Value {
        let mut rec = json!({
            "record": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Io { path, .. } | CliError::Data { path, .. } => {
                rec["path"] = json!(path.display().to_string());
            }
            CliError::Parse { path, field, .. } => {
                rec["path"] = json!(path.display().to_string());
                rec["field"] = json!(field);
            }
            CliError::Validation { field, .. } => rec["field"] = json!(field),
            CliError::Algorithm(_) => {}
        }
        rec
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
