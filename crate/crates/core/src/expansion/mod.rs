//! Planning model: construction from a scenario, and decoding of solutions
//! into expansion plans.

mod builder;
mod plan;

pub use builder::{
    build_planning_model, Census, LineChoice, LineKind, ModelOptions, PlanLine, PlanningModel,
    VarIndex,
};
pub use plan::{extract_plan, solve_scenario, Action, Decision, ExpansionPlan, ScenarioSolve, YearCost};

use crate::error::PlanError;

/// Capital recovery factor `r (1+r)^L / ((1+r)^L - 1)`; `1/L` when `r = 0`.
pub fn crf(rate: f64, life: f64) -> Result<f64, PlanError> {
    if !(life >= 1.0) {
        return Err(PlanError::InvalidLife(life));
    }
    if rate == 0.0 {
        return Ok(1.0 / life);
    }
    let g = (1.0 + rate).powf(life);
    Ok(rate * g / (g - 1.0))
}

/// Capacity of a line after the health penalty of its end towers.
///
/// Both towers replaced: full capacity. One replaced: scaled by the health
/// of the other end. Neither: scaled by the mean health of both ends.
pub fn effective_capacity(
    capacity: f64,
    health_i: f64,
    health_j: f64,
    replaced_i: bool,
    replaced_j: bool,
) -> f64 {
    match (replaced_i, replaced_j) {
        (true, true) => capacity,
        (true, false) => capacity * health_j,
        (false, true) => capacity * health_i,
        (false, false) => capacity * (health_i + health_j) / 2.0,
    }
}

/// Present-value factor of year `a` (1-based).
pub fn discount(rate: f64, a: usize) -> f64 {
    (1.0 + rate).powi(-(a as i32 - 1))
}

/// Learning-curve multiplier on investment costs in year `a`.
pub fn learning(rate: f64, a: usize) -> f64 {
    (1.0 - rate).powi(a as i32 - 1)
}
