use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("profile solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    ProfileNotConverged {
        iterations: usize,
        residual: f64,
        last: Box<crate::profiles::ProfileSolution>,
    },

    #[error("no sign change of the current indicator on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("eigensolver did not converge: {message}")]
    EigenNotConverged { message: String, trace: Vec<f64> },

    #[error("RHS not orthogonal to kernel (relative projection {0:.3e})")]
    NotOrthogonal(f64),

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("linear solve did not converge (residual {0:.3e})")]
    SolveNotConverged(f64),

    #[error("profile table exhausted at R = {0}")]
    TableExhausted(f64),

    #[error("outside coordinate chart at (t, r) = ({t}, {r})")]
    OutsideChart { t: f64, r: f64 },

    #[error("chart overlap at (t, r) = ({t}, {r})")]
    ChartOverlap { t: f64, r: f64 },

    #[error("focal point: n = {n:.3e} at (y0, y1) = ({y0}, {y1})")]
    FocalPoint { y0: f64, y1: f64, n: f64 },

    #[error("band too narrow: seam mismatch {0:.3e}")]
    BandTooNarrow(f64),

    #[error("blow-up detected at t = {t}")]
    BlowUp {
        t: f64,
        last: Box<crate::wavesim::FieldState>,
    },

    #[error("left the U_delta neighborhood at y0 = {0}")]
    LeftNeighborhood(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
