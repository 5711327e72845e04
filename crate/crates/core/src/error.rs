use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("curve needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("degenerate segment at node {index} (length {length:e})")]
    DegenerateSegment { index: usize, length: f64 },
    #[error("curve touches the origin at node {index} (|z| = {radius:e})")]
    OriginContact { index: usize, radius: f64 },
    #[error("ambient dimension must be at least 1")]
    BadDimension,
    #[error("angle increment {increment:.3} at node {index} is too large; refine the grid")]
    RefineGrid { index: usize, increment: f64 },
    #[error("{what} angle sum {turns} is not an integer number of turns")]
    NonIntegerWinding { what: &'static str, turns: f64 },
    #[error("curve is not starshaped; the polar angle β is undefined")]
    NotStarshaped,
    #[error("curvature blow-up: max|f| = {max_f:e} exceeds {limit:e}")]
    BlowUp { max_f: f64, limit: f64 },
    #[error("time step {dt:e} underflowed")]
    StepUnderflow { dt: f64 },
    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),
    #[error("rescaling horizon T = {horizon} does not exceed t = {t}")]
    BadHorizon { horizon: f64, t: f64 },
    #[error("neither max|f| nor |A| grew 10x (max|f| {initial:e} -> {peak:e})")]
    InsufficientBlowup { initial: f64, peak: f64 },
    #[error("need at least {min} trajectory samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("profile did not return within the arc budget ({steps} steps, s = {arclength})")]
    NoReturn { steps: usize, arclength: f64 },
    #[error("closure defect has no sign change on [{lo}, {hi}] ({d_lo:e}, {d_hi:e})")]
    NoRoot { lo: f64, hi: f64, d_lo: f64, d_hi: f64 },
    #[error("profile did not close: defect {defect:e} after {iterations} iterations")]
    NotClosed { defect: f64, iterations: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}
