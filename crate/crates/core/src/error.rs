use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map registration failed for `{family}`: {reason}")]
    Registration { family: String, reason: String },

    #[error("inverse solver did not converge (residual {residual:.3e} after {iterations} iterations)")]
    InverseDiverged { residual: f64, iterations: usize },

    #[error("fixed point set is not isolated: {candidates} refined candidates survive deduplication")]
    NonIsolatedFixedSet { candidates: usize },

    #[error("curve passes through a fixed point (|f(p)-p| = {magnitude:.3e} at θ={theta:.6}, r={r:.6})")]
    CurveHitsFixedPoint { theta: f64, r: f64, magnitude: f64 },

    #[error("boundary index halving is not exact: doubled index {doubled}")]
    OddDoubledIndex { doubled: i64 },

    #[error("fixed point on the boundary circle (min displacement {min_displacement:.3e})")]
    BoundaryFixedPoint { min_displacement: f64 },

    #[error("lower boundary displacement not normalizable into (0,1): range [{min:.6}, {max:.6}]")]
    NormalizationError { min: f64, max: f64 },

    #[error("brick is not certifiably free (margin {margin:.3e})")]
    NotCertifiablyFree { margin: f64 },

    #[error("quadtree refinement exceeded depth {depth} near θ={theta:.6}, r={r:.6}")]
    RefinementOverflow { depth: usize, theta: f64, r: f64 },

    #[error("reachability window too small: flags unstable between W={small} and W={large}")]
    WindowTooSmall { small: i64, large: i64 },

    #[error("no frontier component separates the strip ends")]
    NoSeparatingComponent,

    #[error("image of the curve crosses it transversally away from fixed points")]
    NotProper,

    #[error("iterate horizon overflow: {needed} exceeds cap {cap}")]
    HorizonOverflow { needed: usize, cap: usize },

    #[error("witness arc failed a certificate: {0}")]
    CertificateFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
