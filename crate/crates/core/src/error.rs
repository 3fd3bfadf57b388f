//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bank id {id:?}: {reason}")]
    InvalidBankId { id: String, reason: &'static str },

    #[error("invalid amount {text:?}: {reason}")]
    InvalidAmount { text: String, reason: &'static str },

    #[error("money arithmetic overflow")]
    MoneyOverflow,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown bank {0}")]
    UnknownBank(String),

    #[error("self-loop rejected: bank {0} cannot owe itself")]
    SelfLoop(String),

    #[error("transaction {borrower}->{lender} on {date} is outside the declared universe")]
    OutsideUniverse {
        borrower: String,
        lender: String,
        date: String,
    },

    #[error("transaction {borrower}->{lender} dated {date} does not belong to network day {expected}")]
    WrongDay {
        borrower: String,
        lender: String,
        date: String,
        expected: String,
    },

    #[error("edge weight must be positive ({borrower}->{lender})")]
    NonPositiveWeight { borrower: String, lender: String },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("network too small: {0}")]
    TooFewBanks(String),

    #[error("tail fit: {0}")]
    TailFit(String),

    #[error("generator: {0}")]
    Generator(String),

    #[error("no networks supplied")]
    EmptyNetworkSet,

    #[error("total {direction} exposure is zero; concentration undefined")]
    ZeroExposure { direction: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
