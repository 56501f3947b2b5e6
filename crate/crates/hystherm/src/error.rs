use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

/// One invalid configuration entry, addressed by its dotted path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config file not found: {}", path.display())]
    ConfigMissing { path: PathBuf },

    #[error("malformed config {}: {message} (line {line}, column {column})", path.display())]
    ConfigSyntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {}", join_fields(.0))]
    ConfigInvalid(Vec<FieldError>),

    #[error("malformed field file {}: {message}", path.display())]
    FieldFile { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("environment: {0}")]
    Environment(String),

    #[error("solver: {0}")]
    Solver(#[from] hystherm_core::Error),
}

fn join_fields(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("{}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("; ")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigMissing { .. } => "config_missing",
            CliError::ConfigSyntax { .. } => "config_syntax",
            CliError::ConfigInvalid(_) => "config_invalid",
            CliError::FieldFile { .. } => "field_file",
            CliError::Io { .. } => "io",
            CliError::Environment(_) => "environment",
            CliError::Solver(_) => "solver",
        }
    }

    /// Process exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Solver(_) => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::ConfigInvalid(fields) => {
                body["fields"] = json!(fields);
            }
            CliError::ConfigSyntax { line, column, .. } => {
                body["line"] = json!(line);
                body["column"] = json!(column);
            }
            _ => {}
        }
        json!({ "error": body })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
