use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate internal level label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown internal level label `{0}`")]
    UnknownLabel(String),

    #[error("fock dimension must be at least 2, got {0}")]
    FockTooSmall(usize),

    #[error("space needs at least one internal level")]
    EmptySpace,

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands live on different Hilbert spaces")]
    SpaceMismatch,

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("density matrix has eigenvalue {0:e} below the positivity floor")]
    NotPositive(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate dressed-state problem: Ω₀ = Δ = 0")]
    DegenerateDressing,

    #[error("degenerate pump system: total E_y linewidth and pump detuning are both zero")]
    DegeneratePump,

    #[error("spectrum denominator vanishes at ω = {omega} (|D| = {magnitude:e})")]
    SpectrumPole { omega: f64, magnitude: f64 },

    #[error("net heating: W + γ_m = {0:e} ≤ 0")]
    NetHeating(f64),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("steady state is not unique (pivot ratio {0:e})")]
    NonUniqueSteadyState(f64),

    #[error("steady-state residual {0:e} above tolerance")]
    SteadyStateResidual(f64),

    #[error("correlation does not decay (spectral abscissa {0:e})")]
    NonDecaying(f64),

    #[error("integration step underflow at t = {t} (h = {h:e}); loosen rel/abs tolerances or rescale the problem")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {0} steps")]
    MaxSteps(usize),

    #[error("non-finite state at t = {0}")]
    NonFinite(f64),

    #[error("tolerance {0:e} outside (0, 1e-2]")]
    BadTolerance(f64),

    #[error("Fock truncation inadequate: top-level population {value:e} at t = {t} exceeds {threshold:e}")]
    Leakage { t: f64, value: f64, threshold: f64 },

    #[error("trace drifted to {trace} at t = {t}")]
    TraceDrift { t: f64, trace: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
