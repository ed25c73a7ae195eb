use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid slit index {0}, expected 1 or 2")]
    InvalidSlitIndex(u8),

    #[error("negative propagation distance zeta = {0}")]
    NegativeZeta(f64),

    #[error("slit half-separation must be positive, got {0}")]
    InvalidDelta(f64),

    #[error("unphysical state: |r| = {0} exceeds 1")]
    Unphysical(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature grid too coarse: estimated error {estimate:e} exceeds {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("balancing formula requires w1 < w2 < 0, got w1 = {w1}, w2 = {w2}")]
    BalanceDomain { w1: f64, w2: f64 },

    #[error("invalid search range ({0}, {1}]")]
    InvalidRange(f64, f64),

    #[error("detector windows overlap: {0} and {1}")]
    OverlappingWindows(usize, usize),

    #[error("rank-deficient measurement, non-informative directions: {0:?}")]
    RankDeficient(Vec<[f64; 3]>),

    #[error("no accepted photons")]
    NoCounts,

    #[error("outcome {0} has zero probability under the current estimate but nonzero counts")]
    ZeroProbabilityOutcome(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
