use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Variants are grouped by how a caller is expected to react: bad input
/// (`InvalidArgument`, `Config`), an unmet mathematical precondition
/// (`Precondition`, `GapClosed`), or a numerical ladder that did not settle
/// (`NonConvergence`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition `{invariant}` failed: {detail}")]
    Precondition { invariant: &'static str, detail: String },

    #[error("no spectral gap at E_F = {fermi_energy}: {detail}")]
    GapClosed { fermi_energy: f64, detail: String },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { invariant, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
