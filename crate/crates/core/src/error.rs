use gridplan_milp::{ModelError, SolveError};
use thiserror::Error;

use crate::grid::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("growth rate {0} is below -1")]
    InvalidRate(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("no risk factor has a positive weight")]
    ZeroWeights,
    #[error("risk factor `{0}` has a score outside [0,1] or a negative weight")]
    InvalidFactor(String),
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("life must be at least one year, got {0}")]
    InvalidLife(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("solution has no incumbent to decode")]
    NoIncumbent,
    #[error("decoded plan violates the model: {0}")]
    Verification(String),
    #[error("cost breakdown {breakdown} does not reconcile with objective {objective}")]
    Reconciliation { breakdown: f64, objective: f64 },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep has no values")]
    EmptyValues,
    #[error("cannot resolve parameter path `{0}`")]
    UnknownPath(String),
    #[error("plans have different topology: {0}")]
    TopologyMismatch(String),
    #[error("zipped axes have different lengths")]
    MismatchedAxes,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}
