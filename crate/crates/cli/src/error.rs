//! Error classes and their exit codes.

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, unreadable inputs. Exit 1.
    Usage(String),
    /// Inputs parse but violate a domain rule. Exit 2.
    Domain(String),
    /// A computation failed; partial output may have been written. Exit 3.
    Numeric(String),
}

impl AppError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Domain(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Domain(m) => write!(f, "validation failed: {m}"),
            Self::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

pub type AppResult<T> = Result<T, AppError>;

pub fn usage(e: impl fmt::Display) -> AppError {
    AppError::Usage(e.to_string())
}

pub fn domain(e: impl fmt::Display) -> AppError {
    AppError::Domain(e.to_string())
}

pub fn numeric(e: impl fmt::Display) -> AppError {
    AppError::Numeric(e.to_string())
}
