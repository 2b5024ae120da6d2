use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("AllDepthMissing: depth image has no valid (non-zero) pixel")]
    AllDepthMissing,
    #[error("ZeroDepthTarget: depth at the rendering pixel is zero")]
    ZeroDepthTarget,
    #[error("NotARotation: matrix is not orthonormal with det +1 (tolerance 1e-6)")]
    NotARotation,
    #[error("EmptyCloud: point cloud has no points")]
    EmptyCloud,
    #[error("PointAtOrigin: {count} points closer than 1e-9 to the origin were skipped")]
    PointAtOrigin { count: usize },
    #[error("NotUnit: direction norm {norm} deviates from 1 by more than 1e-6")]
    NotUnit { norm: f64 },
    #[error("MissingPixels: environment map contains missing-pixel sentinels")]
    MissingPixels,
    #[error("EmptySamples: no samples given to the Monte Carlo projector")]
    EmptySamples,
    #[error("TooFewPoints: got {got} points, need at least {need}")]
    TooFewPoints { got: usize, need: usize },
    #[error("GraphConsumed: backward already ran on this graph; re-run forward first")]
    GraphConsumed,
    #[error("DivergedLoss: loss became non-finite at step {step}")]
    DivergedLoss { step: usize },
    #[error("DegenerateScene: {0}")]
    DegenerateScene(String),
    #[error("TooFewScenes: need at least 2 scenes, got {0}")]
    TooFewScenes(usize),
    #[error("FormatVersionMismatch: expected {expected}, found {found}")]
    FormatVersionMismatch { expected: u32, found: u32 },
    #[error("ChecksumMismatch: {path}")]
    ChecksumMismatch { path: String },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("Format: {0}")]
    Format(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
