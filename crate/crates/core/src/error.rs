use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter or operation input violated a constraint.
    #[error("{0}")]
    InvalidInput(String),

    /// A configuration file or override could not be interpreted.
    #[error("config error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        message: String,
    },

    /// An iterative method hit its iteration cap.
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The objective was still increasing at the largest search bound tried.
    #[error("{context}: payoff still increasing at search bound {bound:e}")]
    BracketExpansion { context: &'static str, bound: f64 },

    /// A root-finding bracket did not straddle a sign change.
    #[error("{context}: no sign change on [{lo:e}, {hi:e}] (g = {g_lo:e}, {g_hi:e})")]
    NoSignChange {
        context: &'static str,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    /// A sweep grid point failed; wraps the underlying error.
    #[error("grid point {sweep_var}={value}: {source}")]
    GridPoint {
        sweep_var: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
