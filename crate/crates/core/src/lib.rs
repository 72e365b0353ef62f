//! Multi-year transmission expansion planning with tower health, node risk
//! and heat pump allocation.

mod error;
pub mod expansion;
pub mod grid;
pub mod io;
pub mod risk;
pub mod sweep;

pub use error::{GridError, IoError, PlanError, RiskError, SweepError};
pub use gridplan_milp as milp;
