use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "photon truncation n_max = {n_max} leaves P(n_max) = {tail:.3e} above the 1e-9 tail threshold; \
         use n_max >= {required}"
    )]
    Truncation {
        n_max: usize,
        tail: f64,
        required: usize,
    },

    #[error("adiabatic swap would push {mass:.3e} of population above n_max = {n_max}")]
    SwapOverflow { n_max: usize, mass: f64 },

    #[error("distribution is not normalized (sum = {sum})")]
    Unnormalized { sum: f64 },

    #[error("distribution has a negative entry {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("distribution lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("subsystem set must not be empty")]
    EmptySubsystemSet,

    #[error("partition blocks overlap or are empty")]
    InvalidPartition,

    #[error("mutual information {0:.3e} is negative beyond round-off")]
    NegativeMutualInformation(f64),

    #[error("reference distribution vanishes on the support of `{what}`")]
    SupportViolation { what: &'static str },

    #[error("D_QC routes disagree: decomposed {decomposed} vs direct {direct}")]
    RouteMismatch { decomposed: f64, direct: f64 },

    #[error("sweep point {index} failed: {source}")]
    SweepPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("shot table has no detected shots")]
    EmptyTable,

    #[error("shot table is degenerate ({detected} detected shots); bootstrap needs at least 2")]
    DegenerateTable { detected: u64 },

    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
