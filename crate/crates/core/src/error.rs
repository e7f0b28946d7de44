use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: u128,
        range: &'static str,
    },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("estimated cost {estimated_cost} exceeds budget {budget} (group size {group_size})")]
    BudgetExceeded {
        estimated_cost: u128,
        budget: u128,
        group_size: u128,
    },

    #[error("operands disagree: {0}")]
    Mismatch(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn out_of_range(
        what: &'static str,
        value: impl Into<u128>,
        range: &'static str,
    ) -> Self {
        Error::OutOfRange {
            what,
            value: value.into(),
            range,
        }
    }
}
