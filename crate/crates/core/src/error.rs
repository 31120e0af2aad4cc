use std::path::PathBuf;

/// Errors produced by the detection, training and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// Non-finite loss or gradient. `trace` holds the losses recorded
    /// before the failure.
    #[error(
        "training diverged{}{}",
        iteration.map(|i| format!(" at iteration {i}")).unwrap_or_default(),
        layer.map(|l| format!(": non-finite gradient in layer {l}")).unwrap_or_default()
    )]
    Divergence {
        iteration: Option<usize>,
        layer: Option<usize>,
        trace: Vec<f64>,
    },

    #[error("model format error: {0}")]
    Format(String),

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
