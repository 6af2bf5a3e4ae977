use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pixel count must be at least 1")]
    ZeroPixels,

    #[error("pixel count mismatch: apparatus has N={config}, SLM has N={slm}")]
    PixelCountMismatch { config: usize, slm: usize },

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse for order N={order}: step {step:.3e} exceeds {max_step:.3e} (fringes would alias)")]
    GridTooCoarse { order: usize, step: f64, max_step: f64 },

    #[error("field pipeline disagrees with closed form at pixel {pixel}: deviation {deviation:.3e}")]
    PipelineMismatch { pixel: usize, deviation: f64 },

    #[error("trace is constant; no fringes to analyse")]
    NoFringes,

    #[error("need at least {needed} samples, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("sample abscissae are not uniformly spaced")]
    NonUniformGrid,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("analysis window [{lo}, {hi}] is empty or outside the grid")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("mean intensity must be non-negative, got {0}")]
    NegativeMean(f64),

    #[error("insufficient scan: {0}")]
    InsufficientScan(String),

    #[error("aliasing: {0}")]
    Aliasing(String),
}

impl Error {
    /// Numerical or scan failures, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GridTooCoarse { .. }
                | Error::PipelineMismatch { .. }
                | Error::NoFringes
                | Error::InsufficientScan(_)
                | Error::Aliasing(_)
        )
    }
}
