use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid system parameters: {0}")]
    InvalidSpec(String),

    #[error("port drive is resonant with the cavity (|Δc| = {detuning:.4e} rad/µs below floor {floor:.4e})")]
    ResonantPortDrive { detuning: f64, floor: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("step size underflow at t = {t} µs (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("steady state is not unique: null space of the generator is degenerate ({0})")]
    DegenerateSteadyState(String),

    #[error("generator has a time-periodic part; use the periodic steady-state path")]
    TimeDependentGenerator,

    #[error("state is not stationary for the generator (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("coincidence value is zero; correlation cannot be normalized")]
    ZeroCoincidence,

    #[error("correlation window too short: |g(τmax) - g(∞)| = {tail:e} exceeds {limit:e}")]
    InsufficientSpan { tail: f64, limit: f64 },

    #[error("τ spacing {spacing_us} µs aliases the requested band (|δf| up to {band_mhz} MHz)")]
    Aliasing { spacing_us: f64, band_mhz: f64 },

    #[error("periodic steady state not reached after {periods} periods (drift {drift:e})")]
    PeriodicSteadyState { periods: usize, drift: f64 },

    #[error("root bracket not found for target {target} while scanning [{lo}, {hi}]")]
    BracketFailure { target: f64, lo: f64, hi: f64 },

    #[error("truncation did not converge up to {max_levels} cavity levels (last change {change:e})")]
    TruncationNotConverged { max_levels: usize, change: f64 },

    #[error("dressed-state subspace identification failed: {0}")]
    SubspaceIdentification(String),

    #[error("unsupported transition index combination: {0}")]
    UnsupportedTransition(String),

    #[error("fit did not converge after {iterations} iterations")]
    FitNonConvergence { iterations: usize },

    #[error("degenerate fit design: {0}")]
    DegenerateDesign(String),

    #[error("flux bias outside the transmon branch: cos(π δφ/φ0) = {0}")]
    OutOfBranch(f64),

    #[error("data is growing, not decaying")]
    Growth,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage { stage, source: Box::new(source) }
    }

    /// Innermost non-stage error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self.root(), Error::Config(_))
    }
}
