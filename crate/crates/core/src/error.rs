use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resolvent iteration failed for c = {c}")]
    ResolventDivergence { c: f64 },
    #[error("{block} Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { block: &'static str, iterations: usize, residual: f64 },
    #[error("active-set iteration did not settle after {iterations} iterations")]
    ActiveSetCycling { iterations: usize },
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("temperature lost positivity at node {node} (value {value:e})")]
    PositivityLoss { node: usize, value: f64 },
    #[error("nonpositive temperature {value:e} in element {element}")]
    NonpositiveTemperature { element: usize, value: f64 },
    #[error("boundary heat source must be nonnegative (got {0})")]
    NegativeBoundarySource(f64),
    #[error("step {step} failed: {reason}")]
    StepDivergence { step: usize, reason: String },
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),
    #[error("window ({s}, {t}) is not aligned with the stored time levels")]
    WindowMisaligned { s: usize, t: usize },
    #[error("test field is negative at node {node}")]
    NegativeTestFunction { node: usize },
    #[error("test field violates 0 <= zeta <= z_old at node {node}")]
    InadmissibleTestField { node: usize },
    #[error("grid-search minimizer touches the search box in coordinate {coordinate}")]
    SearchBoxTooSmall { coordinate: usize },
    #[error("archive rejected: {0}")]
    ArchiveMismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ResolventDivergence { .. } => "resolvent-divergence",
            Error::NewtonDivergence { .. } => "newton-divergence",
            Error::ActiveSetCycling { .. } => "active-set-cycling",
            Error::LinearSolveFailure(_) => "linear-solve-failure",
            Error::PositivityLoss { .. } => "positivity-loss",
            Error::NonpositiveTemperature { .. } => "nonpositive-temperature",
            Error::NegativeBoundarySource(_) => "negative-boundary-source",
            Error::StepDivergence { .. } => "step-divergence",
            Error::InvalidInitialData(_) => "invalid-initial-data",
            Error::ConfigInvalid(_) => "config-invalid",
            Error::WindowMisaligned { .. } => "window-misaligned",
            Error::NegativeTestFunction { .. } => "negative-test-function",
            Error::InadmissibleTestField { .. } => "inadmissible-test-field",
            Error::SearchBoxTooSmall { .. } => "search-box-too-small",
            Error::ArchiveMismatch(_) => "archive-mismatch",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
