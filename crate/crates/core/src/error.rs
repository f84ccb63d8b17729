use thiserror::Error;

/// Errors produced by parsing, validation and the numerical solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown directive `{directive}`")]
    UnknownDirective { line: usize, directive: String },

    #[error("netlist has no .input directive")]
    MissingInput,

    #[error("line {line}: duplicate .input directive")]
    DuplicateInput { line: usize },

    #[error("invalid characteristic: {0}")]
    InvalidCharacteristic(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular slope at v = 0 (minimum exponent {min_exponent} < 1)")]
    SingularSlope { min_exponent: f64 },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("unknown canonical circuit `{0}`")]
    UnknownCanonical(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh basis: {0}")]
    InvalidMeshBasis(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("ill-conditioned series fit (condition number {condition:e})")]
    IllConditioned { condition: f64 },
}

impl Error {
    /// True for failures of the numerical solvers rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::NonConvergence { .. } | Self::Singular(_) | Self::IllConditioned { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
