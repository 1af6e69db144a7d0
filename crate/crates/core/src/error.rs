use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants are grouped so a front end can map them onto distinct exit
/// statuses: configuration problems, infeasible instances, and failed
/// numeric invariants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("size cap exceeded: {what} needs {required} elements, cap is {cap}")]
    SizeCap {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("numeric coefficient collision: {0}")]
    NumericCollision(String),

    #[error("symbol {0} has no value")]
    UnresolvableSymbol(String),

    #[error("rank deficient span: {0}")]
    RankDeficient(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("malformed channel file: {0}")]
    ChannelFile(String),
}

impl Error {
    /// True for errors caused by an instance that cannot be realised at the
    /// requested power or size, as opposed to a malformed request.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::SizeCap { .. })
    }

    /// True for errors raised by a numeric diagnostic rather than by input.
    pub fn is_diagnostic(&self) -> bool {
        matches!(self, Error::NumericCollision(_) | Error::RankDeficient(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
