//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading models or running analyses.
#[derive(Debug, Error)]
pub enum Error {
    /// A mean or oscillation was requested over an empty cell set.
    #[error("empty generator: statistics need positive measure")]
    EmptyGenerator,

    /// A cover check was requested for an empty target set.
    #[error("empty target: cover checks need positive measure")]
    EmptyTarget,

    /// A fattening was requested for an empty seed set.
    #[error("empty seed set")]
    EmptySet,

    /// Oscillation exponents must satisfy p >= 1 (p > 1 for A_p constants).
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    /// Parameter combination outside its documented domain.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Partition failed the disjoint-cover validation.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// The operation needs a function with a strictly positive seminorm.
    #[error("zero seminorm: function is constant on every generator")]
    ZeroSeminorm,

    /// Weight functions must be strictly positive on every cell.
    #[error("nonpositive weight at cell {0}")]
    NonpositiveWeight(usize),

    /// Generator id or index not present in the family.
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    /// Function name not present in the model.
    #[error("unknown function {0:?}")]
    UnknownFunction(String),

    /// The exponential-bracket bound needs alpha strictly below the decay rate.
    #[error("alpha = {alpha} too large: must be below {limit}")]
    AlphaTooLarge { alpha: f64, limit: f64 },

    /// Decompositions need alpha above the stated threshold.
    #[error("alpha = {alpha} too small: must exceed {limit}")]
    AlphaTooSmall { alpha: f64, limit: f64 },

    /// The decomposition requires a caller-normalized function.
    #[error("function not normalized: seminorm {seminorm} differs from 1 beyond 1e-9")]
    NotNormalized { seminorm: f64 },

    /// A required double does not exist in the family.
    #[error("no double exists for generator {0:?}")]
    MissingDouble(String),

    /// The double chain cycled without exiting the active set.
    #[error("no maximal pick: double chain stayed inside the active set for {0} hops")]
    NoMaximalPick(usize),

    /// A norm-equivalence bound was requested without a verified decay premise.
    #[error("decay premise not verified: {0}")]
    JnNotVerified(String),

    /// Builder parameters exceed the documented size limits.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// The JSON document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The document parsed but violates a model invariant.
    #[error("model invariant violated: {0}")]
    Model(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(String),
}
