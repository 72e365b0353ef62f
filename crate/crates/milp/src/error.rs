use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("row `{row}` references undeclared variable index {var}")]
    UnknownVariable { row: String, var: usize },
    #[error("variable `{var}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: String, lower: f64, upper: f64 },
    #[error("row `{row}` has a non-finite coefficient or right-hand side")]
    NonFinite { row: String },
    #[error("indicator `{row}` is guarded by non-binary variable `{var}`")]
    NonBinaryGuard { row: String, var: String },
    #[error("product operand `{var}` is not binary")]
    NonBinaryOperand { var: String },
    #[error("indicator `{row}` cannot be bounded: variable `{var}` is unbounded in the needed direction")]
    UnboundedIndicator { row: String, var: String },
    #[error("model still contains {0} unreformulated indicator constraint(s)")]
    PendingIndicators(usize),
    #[error("model has no variables")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("numerical failure in simplex: {0}")]
    Numerical(String),
    #[error("incumbent failed verification: {0}")]
    Verification(String),
}
