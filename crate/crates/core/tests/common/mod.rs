#![allow(dead_code)]

use gridplan::expansion::{build_planning_model, ModelOptions, PlanningModel};
use gridplan::grid::{NodeSeries, PlanningScenario};
use gridplan::io::build_toy3;
use gridplan::milp::{solve_milp, MilpSolution, MilpStatus, SolverConfig};

pub fn solve_model(pm: &PlanningModel) -> MilpSolution {
    solve_milp(&pm.model, &SolverConfig::default()).expect("solve")
}

/// toy3 with node-3 demand `base` every step except `peak` at step 0 of
/// year `peak_year`.
pub fn toy3_with_peak(z: usize, base: f64, peak: f64, peak_year: usize) -> PlanningScenario {
    let mut s = build_toy3();
    s.economics.construction_time = z;
    let years = s.economics.horizon_years;
    s.demand.electric = vec![NodeSeries {
        node: 3,
        values: (1..=years)
            .map(|a| vec![if a == peak_year { peak } else { base }, base])
            .collect(),
    }];
    s
}

/// toy3 with heat demand at node 3 and heat pumps available.
pub fn toy3_heat(cop: f64) -> PlanningScenario {
    let mut s = build_toy3();
    let years = s.economics.horizon_years;
    s.demand.heat = vec![NodeSeries {
        node: 3,
        values: (0..years)
            .map(|k| {
                let f = 1.0 + 0.1 * k as f64;
                vec![4.0 * f, 2.0 * f]
            })
            .collect(),
    }];
    s.heat_pump.enabled = true;
    s.heat_pump.cop = cop;
    s
}

/// toy3 with unhealthy, replaceable towers at both ends of 2-3.
pub fn toy3_towers(health: f64) -> PlanningScenario {
    let mut s = build_toy3();
    for id in [2, 3] {
        let n = s.network.node_mut(id).unwrap();
        n.health_index = health;
        n.replacement_cost = 50.0;
    }
    s
}

/// Solve status of `s` with the listed line decisions forced on and every
/// other line decision forced off.
pub fn status_with_forced(
    s: &PlanningScenario,
    force: impl Fn(&PlanningModel, usize) -> Option<bool>,
) -> MilpStatus {
    let mut pm = build_planning_model(s, ModelOptions::default()).unwrap();
    let vars: Vec<(usize, usize)> = pm
        .index
        .replace
        .iter()
        .chain(&pm.index.build)
        .enumerate()
        .map(|(i, ch)| (i, ch.var.index()))
        .collect();
    for (i, v) in vars {
        if let Some(on) = force(&pm, i) {
            let var = &mut pm.model.variables[v];
            let x = if on { 1.0 } else { 0.0 };
            var.lower = x;
            var.upper = x;
        }
    }
    solve_model(&pm).status
}
