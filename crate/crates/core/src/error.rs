use thiserror::Error;

/// Errors raised by the homogenization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid {nx}x{ny} rejected: both sides must be even and at least 2")]
    OddGrid { nx: usize, ny: usize },

    #[error("inclusion not representable on an {n}-pixel grid: {reason}")]
    Representability { n: usize, reason: String },

    #[error("geometry parameter out of range: {0}")]
    GeometryParam(String),

    #[error("raster parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("spectral interval rejected: need 0 < alpha < beta < inf, got alpha={alpha}, beta={beta}")]
    Interval { alpha: f64, beta: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("argument {re}{im:+}i lies on the branch cut of the square root")]
    BranchCut { re: f64, im: f64 },

    #[error("degenerate t: {0}")]
    DegenerateT(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular reference shift: {0}")]
    SingularShift(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("mean flux vanishes; residual undefined")]
    DegenerateFlux,

    #[error("grid mismatch: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
