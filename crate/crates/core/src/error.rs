use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown divergence `{0}`")]
    UnknownDivergence(String),

    #[error("parameter `{name}` = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("interval {interval} is not contained in the domain {domain} of `{generator}`")]
    OutsideDomain {
        generator: String,
        interval: String,
        domain: String,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("likelihood ratio {ratio} lies outside the domain {domain} of `{generator}`")]
    DomainError {
        generator: String,
        ratio: f64,
        domain: String,
    },

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("invalid skew parameters: {0}")]
    InvalidSkew(String),

    #[error("degenerate skew scheme: mean skew {alpha_bar} sits on the boundary with heterogeneous skews")]
    DegenerateScheme { alpha_bar: f64 },

    #[error("invalid Bayes problem: {0}")]
    InvalidProblem(String),

    #[error("first distribution is not absolutely continuous with respect to the second; KL is infinite")]
    NotAbsolutelyContinuous,

    #[error("{0}")]
    Input(String),
}
