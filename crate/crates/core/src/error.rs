use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: bad indices, duplicate selections, out-of-range budgets.
    #[error("input error: {0}")]
    Input(String),

    /// The instance document breaks one or more structural invariants.
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    /// The request is well-formed but has no solution (e.g. too few selectable walks).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An exhaustive search would exceed its configured enumeration cap.
    #[error("enumeration cap of {cap} exceeded ({needed} required)")]
    CapExceeded { cap: u64, needed: u128 },

    /// A precondition of the requested algorithm does not hold for this instance.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two evaluation routes that must agree produced different values.
    #[error("crosscheck failure: {0}")]
    Crosscheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
