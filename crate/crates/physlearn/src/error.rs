use std::io;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("unknown experiment `{name}`{}", suggest(.suggestions))]
    UnknownExperiment { name: String, suggestions: Vec<String> },

    #[error("unknown parameter `{key}` for {experiment}{}", suggest(.suggestions))]
    UnknownParameter { experiment: String, key: String, suggestions: Vec<String> },

    #[error("invalid value `{value}` for parameter `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },

    #[error("malformed override `{0}`: expected key=value")]
    MalformedOverride(String),

    #[error("config file {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },

    /// Rejected by the simulation kernels before any integration started.
    #[error("invalid parameter: {0}")]
    Model(physlearn_core::Error),

    /// The integration itself failed; details were written to `diagnostics`.
    #[error("numerical abort: {source} (diagnostics in {})", .diagnostics.display())]
    Numerical { source: physlearn_core::Error, diagnostics: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn suggest(names: &[String]) -> String {
    if names.is_empty() {
        String::new()
    } else {
        format!("; did you mean {}?", names.join(", "))
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical { .. } | RunError::Io { .. } => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }
}

/// Whether a kernel error is a rejected input rather than a failed
/// integration.
pub(crate) fn is_config_error(e: &physlearn_core::Error) -> bool {
    use physlearn_core::Error as E;
    matches!(
        e,
        E::InvalidParameter { .. }
            | E::ShapeMismatch { .. }
            | E::NotUnitNorm { .. }
            | E::Empty(_)
            | E::NoBistability { .. }
    )
}
