use thiserror::Error;

/// Errors raised by the solvers and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-positive target or noise power for user {user}: {value}")]
    NonPositiveTarget { user: usize, value: f64 },

    #[error("too few antennas: {users} users need at least as many antennas, got {antennas}")]
    TooFewAntennas { antennas: usize, users: usize },

    #[error("invalid power model: {0}")]
    InvalidPowerModel(String),

    #[error("dual fixed point did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("loaded covariance is not invertible")]
    SingularSystem,

    #[error("power loading system is singular")]
    SingularLoading,

    #[error("power loading returned negative power {power:.3e} for user {user}")]
    NegativePower { user: usize, power: f64 },

    #[error(
        "per-antenna power cap {p_a} still violated (max {max_power:.6}) after {iterations} \
         subgradient steps; the problem is likely infeasible, try more antennas"
    )]
    Infeasible {
        p_a: f64,
        max_power: f64,
        iterations: usize,
    },

    #[error("band {band}: {source}")]
    Band {
        band: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("oracle did not converge: {0}")]
    OracleNoConvergence(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
