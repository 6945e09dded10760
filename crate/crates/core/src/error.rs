use thiserror::Error;

#[derive(Debug, Error)]
pub enum QcaError {
    #[error("word metric search radius {radius} exceeded")]
    RadiusExceeded { radius: usize },

    #[error("subgroup basis is singular")]
    SingularBasis,

    #[error("support mismatch: reconstruction residual {residual:e}")]
    SupportMismatch { residual: f64 },

    #[error("wave-vector operator is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("descriptor has no isotropy group")]
    MissingIsotropy,

    #[error("invalid isotropy group: {0}")]
    InvalidIsotropy(String),

    #[error("eigenphase {omega} is within {tolerance:e} of the logarithm branch point")]
    BranchPoint { omega: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("wave packet envelope {envelope:e} at the zone boundary is not negligible")]
    ZoneLeak { envelope: f64 },

    #[error("packet spreads across the periodic seam along coordinate {axis}")]
    PacketAtBoundary { axis: usize },

    #[error("helicity direction is undefined at k = 0")]
    ZeroWaveVector,

    #[error("{modes} fermionic modes exceed the oracle limit of {limit}")]
    TooManyModes { modes: usize, limit: usize },

    #[error("tiling incompatible with lattice: {0}")]
    TilingIncompatible(String),

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QcaError>;
