use alloc::string::String;

/// Every failure mode of the solver and diagnostic routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension out of range: d = {0} (need even d with 2 <= d <= 16)")]
    DimensionOutOfRange(u32),
    #[error("resolution too low: n = {n} (need at least {min})")]
    ResolutionTooLow { n: usize, min: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field is under-resolved: {tail:.3e} of its mass lies above half the band limit")]
    UnderResolved { tail: f64 },
    #[error("dyadic scale {scale} outside the grid range [{min}, {max}]")]
    ScaleOutOfRange { scale: f64, min: f64, max: f64 },
    #[error("the projected band vanishes")]
    VanishingBand,
    #[error("zero field")]
    ZeroField,
    #[error("bands {big} and {small} are too close: need max >= 4 min")]
    BandSeparation { big: f64, small: f64 },
    #[error("mismatch estimate is vacuous at N·R = {0} (need >= 4)")]
    VacuousRegime(f64),
    #[error("no convergence after {iterations} iterations (last change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },
    #[error("iteration converged to a sign-changing profile")]
    SignChanging,
    #[error("ground-state certification failed: {0}")]
    Certification(String),
    #[error("blowup guard tripped at t = {time}: gradient norm grew {growth:.3e}x")]
    BlowupGuard { time: f64, growth: f64 },
    #[error("resolution lost at t = {time}: spectral tail {tail:.3e}; reduce dt or enlarge the grid")]
    ResolutionLoss { time: f64, tail: f64 },
    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("sequence has no entry for scale {0}")]
    CoverageGap(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
