use std::path::{Path, PathBuf};

use serde_json::json;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A diagnostic or certification check failed.
    pub const DIAGNOSTIC: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const IO: u8 = 3;
    /// A run stopped on the blowup or resolution guard, or an iteration diverged.
    pub const NUMERICAL_GUARD: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] radnls_core::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed {what}: {reason}")]
    Format { what: String, reason: String },
    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(what: impl Into<String>, reason: impl ToString) -> Self {
        CliError::Format { what: what.into(), reason: reason.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        use radnls_core::Error as E;
        match self {
            CliError::Core(E::Certification(_)) | CliError::Diagnostic(_) => exit::DIAGNOSTIC,
            CliError::Core(
                E::BlowupGuard { .. } | E::ResolutionLoss { .. } | E::NonConvergence { .. } | E::SignChanging,
            ) => exit::NUMERICAL_GUARD,
            CliError::Core(_) | CliError::Invalid(_) | CliError::Format { .. } => exit::INVALID_INPUT,
            CliError::Io { .. } => exit::IO,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            exit::DIAGNOSTIC => "diagnostic_failure",
            exit::INVALID_INPUT => "invalid_input",
            exit::IO => "io",
            _ => "numerical_guard",
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let detail = match self {
            CliError::Core(e) => serde_json::to_value(core_detail(e)).unwrap_or_default(),
            CliError::Io { path, .. } => json!({ "path": path }),
            _ => serde_json::Value::Null,
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "detail": detail,
        })
    }
}

fn core_detail(e: &radnls_core::Error) -> serde_json::Value {
    use radnls_core::Error as E;
    match e {
        E::BlowupGuard { time, growth } => json!({ "guard": "blowup", "t": time, "growth": growth }),
        E::ResolutionLoss { time, tail } => json!({ "guard": "resolution", "t": time, "tail": tail }),
        E::NonConvergence { iterations, change } => json!({ "iterations": iterations, "change": change }),
        E::DimensionOutOfRange(d) => json!({ "dimension": d }),
        E::ResolutionTooLow { n, min } => json!({ "n": n, "min": min }),
        E::ScaleOutOfRange { scale, min, max } => json!({ "scale": scale, "min": min, "max": max }),
        _ => serde_json::Value::Null,
    }
}
