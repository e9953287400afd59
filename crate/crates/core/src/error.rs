use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad family name, parameter, channel or flag combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// Coulomb coupling at or beyond |k_d|; the origin exponent is not real.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("no bound state: {0}")]
    NoBoundState(String),

    /// The requested node count was not found. `found` lists every
    /// `(E, nodes)` pair that was refined during the search.
    #[error("no state with {requested} node(s) in this channel; found {found:?}")]
    NoSuchState { requested: usize, found: Vec<(f64, usize)> },

    #[error("integrator failure at r = {r:e}: {reason}")]
    Integrator { r: f64, reason: String },

    /// The node label could not be tracked across a finite-difference
    /// stencil or between neighbouring sweep points.
    #[error("level crossing near parameter value {at}: {detail}")]
    LevelCrossing { at: f64, detail: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
