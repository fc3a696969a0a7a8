use thiserror::Error;

/// Errors raised by the tradeoff library.
///
/// Infeasible constraint sets are *not* errors: closed-form evaluations
/// return a [`TradeoffPoint`](crate::TradeoffPoint) with `feasible == false`
/// and oracle searches return [`OracleOutcome::Infeasible`](crate::oracle::OracleOutcome).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("label is independent of the source (p1 = 1/2); the classification constraint is vacuous")]
    IndependentLabel,

    #[error("degenerate source: {0}")]
    DegenerateSource(String),

    #[error("unsupported source: {0}")]
    UnsupportedSource(String),

    #[error("adaptive quadrature exceeded its budget of {budget} subintervals (error estimate {estimate:e})")]
    IntegrationFailure { budget: usize, estimate: f64 },

    #[error("density does not integrate to 1 over the support (mass = {mass})")]
    NotNormalized { mass: f64 },

    #[error("reference density vanishes at x = {x} where the first density is positive")]
    VanishingReference { x: f64 },

    #[error("component densities do not cross between the means")]
    NoCrossing,

    #[error("witness unavailable: {0}")]
    WitnessUnavailable(String),

    #[error("instance infeasible: {0}")]
    Infeasible(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
