use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, arguments or configuration. Exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A failure reported by one of the pipeline modules.
    #[error("{module}: {message}")]
    Module { module: &'static str, message: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn module(module: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Module {
            module,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, module) = match self {
            CliError::Usage(_) => ("usage", None),
            CliError::Io { .. } => ("io", None),
            CliError::Module { module, .. } => ("module", Some(*module)),
        };
        json!({ "error": { "kind": kind, "module": module, "message": self.to_string() } })
    }
}
