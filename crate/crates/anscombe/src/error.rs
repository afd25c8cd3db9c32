use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] anscombe_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Exit status families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Validation,
    Solver,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Solver => 3,
            ErrorKind::Io => 4,
        }
    }
}

impl AppError {
    pub fn validation(msg: impl Into<String>) -> Self {
        AppError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        use anscombe_core::Error as E;
        match self {
            AppError::Validation(_) | AppError::Parse { .. } => ErrorKind::Validation,
            AppError::Io { .. } => ErrorKind::Io,
            AppError::Core(e) => match e {
                E::Domain { .. } | E::InvalidInput { .. } | E::OutOfRange { .. } | E::Unsupported(_) | E::Singular { .. } => {
                    ErrorKind::Validation
                }
                _ => ErrorKind::Solver,
            },
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: ErrorKind,
            exit_code: i32,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Outer<'a> {
            error: Inner<'a>,
        }
        let message = self.to_string();
        let kind = self.kind();
        serde_json::to_string(&Outer { error: Inner { kind, exit_code: kind.exit_code(), message: &message } })
            .expect("error record serializes")
    }
}

pub type AppResult<T> = Result<T, AppError>;
