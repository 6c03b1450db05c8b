//! Crate error type.

/// Errors surfaced by the simulator library.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// operation ran at.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector pointed into the closed back half-space of an array plane.
    #[error("vector lies behind the array plane (normal component {normal_component})")]
    BehindArray { normal_component: f64 },

    /// Zero-length geometry where a direction was required.
    #[error("degenerate geometry: zero-length separation")]
    DegenerateGeometry,

    /// Queried time outside a trajectory's span.
    #[error("time {t} s outside trajectory span [0, {total}] s")]
    TimeOutOfRange { t: f64, total: f64 },

    /// Every hypothesis in a GLRT grid had zero response at all candidate
    /// codewords, leaving nothing to compare.
    #[error("all hypotheses degenerate: zero IRS response everywhere on the grid")]
    AllHypothesesDegenerate,

    /// Invalid or inconsistent configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Cache or result file I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
