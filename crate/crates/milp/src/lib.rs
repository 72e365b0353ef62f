//! Small mixed-integer LP toolkit: model IR with indicator constraints and
//! binary products, big-M reformulation, two LP backends and a best-first
//! branch-and-bound with post-solve verification.

mod bnb;
mod error;
mod lp_format;
mod model;
mod reformulate;
mod simplex;
mod sparse;
mod verify;

pub use bnb::{
    solve_milp, solve_milp_with, DenseRelaxation, LpBackend, MilpSolution, MilpStatus, NodeRelaxation,
    RelaxationSolver, SolveStats, SolverConfig,
};
pub use error::{ModelError, SolveError};
pub use lp_format::write_lp;
pub use model::{
    BinaryProduct, Constraint, Guard, IndicatorConstraint, LinExpr, MilpModel, Objective,
    ObjectiveSense, RowTag, Sense, VarId, VarKind, Variable,
};
pub use reformulate::ReformulationReport;
pub use simplex::{solve_lp, DenseSimplex, LpProblem, LpRow, LpSolution, LpStatus, SimplexOptions};
pub use sparse::SparseRelaxation;
pub use verify::{verify_solution, VerificationReport, Violation};
