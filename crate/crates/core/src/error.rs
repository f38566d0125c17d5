use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("singular Vandermonde: nodes {0} and {1} coincide")]
    SingularVandermonde(usize, usize),

    #[error("band [{lo}, {hi}] needs at least {needed} samples, got {samples}")]
    Alias {
        lo: i64,
        hi: i64,
        needed: usize,
        samples: usize,
    },

    #[error("sample {index} is near singular (condition {cond:.3e})")]
    NearSingularSymbol { index: usize, cond: f64 },

    #[error("winding undefined: det vanishes near sample {0}")]
    WindingUndefined(usize),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("analyticity error: {0}")]
    Analyticity(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    #[error("factorization error: {0}")]
    Factorization(String),

    #[error("branch match error: {0}")]
    BranchMatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
