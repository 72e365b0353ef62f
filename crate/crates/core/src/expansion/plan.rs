//! Decoding a MILP solution into an expansion plan.

use std::collections::BTreeMap;

use gridplan_milp::{solve_milp, verify_solution, MilpSolution, SolverConfig, VarId};
use serde::{Deserialize, Serialize};

use super::builder::{build_planning_model, LineChoice, LineKind, ModelOptions, PlanningModel};
use super::{crf, discount, effective_capacity, learning};
use crate::error::PlanError;
use crate::grid::{NodeId, PlanningScenario};

/// Values below this are reported as zero.
const NOISE: f64 = 1e-9;
const SEMANTIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    NewLine,
    ReplaceLine,
    Dismantle,
    ReplaceTower,
    HpBuild,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::NewLine => "new-line",
            Action::ReplaceLine => "replace-line",
            Action::Dismantle => "dismantle",
            Action::ReplaceTower => "replace-tower",
            Action::HpBuild => "hp-build",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub year: usize,
    pub action: Action,
    /// Arc label `i-j` or node id.
    pub location: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cable: Option<String>,
    /// MW of the new cable, or MW thermal of heat pump built.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
}

impl Decision {
    fn key(&self) -> (usize, Action, &str, Option<&str>) {
        (self.year, self.action, &self.location, self.cable.as_deref())
    }
}

/// Present-value cost of one year, split by term.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct YearCost {
    pub year: usize,
    pub line: f64,
    pub tower: f64,
    pub hp: f64,
    pub generation: f64,
    pub maintenance: f64,
}

impl YearCost {
    pub fn investment(&self) -> f64 {
        self.line + self.tower + self.hp
    }

    pub fn operational(&self) -> f64 {
        self.generation + self.maintenance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPlan {
    pub scenario: String,
    pub status: String,
    /// Labels of every line the model could use, existing then potential.
    pub lines: Vec<String>,
    /// Sorted by `(year, action, location)`.
    pub decisions: Vec<Decision>,
    pub costs: Vec<YearCost>,
    /// Installed heat pump capacity per node, `[year - 1]`, MW thermal.
    pub hp_capacity: BTreeMap<NodeId, Vec<f64>>,
    pub objective: f64,
    pub investment_cost: f64,
    pub operational_cost: f64,
    pub total_cost: f64,
}

impl ExpansionPlan {
    pub fn count(&self, action: Action) -> usize {
        self.decisions.iter().filter(|d| d.action == action).count()
    }

    /// New lines plus replaced lines.
    pub fn line_interventions(&self) -> usize {
        self.count(Action::NewLine) + self.count(Action::ReplaceLine)
    }

    /// Heat pump capacity installed by the end of the horizon.
    pub fn total_hp_mw(&self) -> f64 {
        self.hp_capacity
            .values()
            .filter_map(|v| v.last())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioSolve {
    pub model: PlanningModel,
    pub solution: MilpSolution,
    /// `None` when the solver found no incumbent.
    pub plan: Option<ExpansionPlan>,
}

pub fn solve_scenario(
    scenario: &PlanningScenario,
    options: ModelOptions,
    config: &SolverConfig,
) -> Result<ScenarioSolve, PlanError> {
    let model = build_planning_model(scenario, options)?;
    let solution = solve_milp(&model.model, config)?;
    let plan = if solution.has_incumbent() {
        Some(extract_plan(&model, &solution, scenario)?)
    } else {
        None
    };
    Ok(ScenarioSolve {
        model,
        solution,
        plan,
    })
}

fn clean(v: f64) -> f64 {
    if v.abs() < NOISE {
        0.0
    } else {
        v
    }
}

fn on(values: &[f64], v: VarId) -> bool {
    values[v.index()] > 0.5
}

/// Rounds binaries, re-verifies the assignment against the model and against
/// the capacity and heat rules evaluated directly from the decisions, and
/// rebuilds the cost breakdown from scenario data.
pub fn extract_plan(
    pm: &PlanningModel,
    solution: &MilpSolution,
    scenario: &PlanningScenario,
) -> Result<ExpansionPlan, PlanError> {
    let Some(objective) = solution.objective.filter(|_| solution.has_incumbent()) else {
        return Err(PlanError::NoIncumbent);
    };
    let mut values = solution.values.clone();
    for b in pm.model.binaries() {
        values[b.index()] = if values[b.index()] > 0.5 { 1.0 } else { 0.0 };
    }
    let report = verify_solution(&pm.model, &values, SEMANTIC_TOL);
    if !report.is_feasible() {
        return Err(PlanError::Verification(report.summary()));
    }
    let problems = check_semantics(pm, scenario, &values);
    if !problems.is_empty() {
        return Err(PlanError::Verification(problems.join("; ")));
    }

    let ix = &pm.index;
    let e = &scenario.economics;
    let r = e.interest_rate;
    let years = e.horizon_years;
    let mut costs: Vec<YearCost> = (1..=years)
        .map(|year| YearCost {
            year,
            ..Default::default()
        })
        .collect();
    let mut decisions = Vec::new();

    for (list, action) in [(&ix.build, Action::NewLine), (&ix.replace, Action::ReplaceLine)] {
        for ch in list.iter().filter(|ch| on(&values, ch.var)) {
            let line = &ix.lines[ch.line];
            let cable = &scenario.catalog[ch.cable];
            costs[ch.year - 1].line += discount(r, ch.year)
                * learning(e.learning_rate, ch.year)
                * cable.unit_cost
                * line.length
                * crf(r, f64::from(cable.life))?;
            decisions.push(Decision {
                year: ch.year,
                action,
                location: line.label.clone(),
                cable: Some(cable.id.clone()),
                capacity: Some(cable.capacity),
            });
        }
    }
    for (&(l, a), &d) in &ix.dismantle {
        if on(&values, d) {
            decisions.push(Decision {
                year: a,
                action: Action::Dismantle,
                location: ix.lines[l].label.clone(),
                cable: None,
                capacity: None,
            });
        }
    }
    for (&n, &g) in &ix.tower {
        if on(&values, g) {
            let node = scenario.network.node(n).expect("tower of a known node");
            costs[0].tower += crf(r, f64::from(node.replacement_life))? * node.replacement_cost;
            decisions.push(Decision {
                year: 1,
                action: Action::ReplaceTower,
                location: n.to_string(),
                cable: None,
                capacity: None,
            });
        }
    }
    let mut hp_capacity: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
    if scenario.heat_pump.enabled {
        let hp = &scenario.heat_pump;
        let hcrf = crf(r, f64::from(hp.life))?;
        for (&(n, a), &h) in &ix.hp_build {
            let built = clean(values[h.index()]);
            costs[a - 1].hp += discount(r, a) * hcrf * hp.unit_cost * built;
            let traj = hp_capacity.entry(n).or_insert_with(|| vec![0.0; years]);
            for v in &mut traj[a - 1..] {
                *v += built;
            }
            if built > 0.0 {
                decisions.push(Decision {
                    year: a,
                    action: Action::HpBuild,
                    location: n.to_string(),
                    cable: None,
                    capacity: Some(built),
                });
            }
        }
    }
    for (&(_, a, t), &g) in &ix.generation {
        costs[a - 1].generation += discount(r, a)
            * scenario.demand.step_weight[t]
            * e.generation_cost
            * clean(values[g.index()]);
    }
    for (l, line) in ix.lines.iter().enumerate() {
        if line.maintenance_cost <= 0.0 {
            continue;
        }
        for a in 1..=years {
            if in_service(pm, &values, l, a) {
                costs[a - 1].maintenance += discount(r, a) * line.maintenance_cost;
            }
        }
    }

    decisions.sort_by(|x, y| x.key().cmp(&y.key()));
    let investment_cost: f64 = costs.iter().map(YearCost::investment).sum();
    let operational_cost: f64 = costs.iter().map(YearCost::operational).sum();
    let total_cost = investment_cost + operational_cost;
    if (total_cost - objective).abs() > 1e-6 * objective.abs().max(1.0) {
        return Err(PlanError::Reconciliation {
            breakdown: total_cost,
            objective,
        });
    }
    Ok(ExpansionPlan {
        scenario: scenario.name.clone(),
        status: solution.status.as_str().to_string(),
        lines: ix.lines.iter().map(|l| l.label.clone()).collect(),
        decisions,
        costs,
        hp_capacity,
        objective,
        investment_cost,
        operational_cost,
        total_cost,
    })
}

/// Chosen decision of a line and whether it is usable in year `a`.
fn chosen<'a>(pm: &'a PlanningModel, values: &[f64], l: usize) -> Option<&'a LineChoice> {
    let list = match pm.index.lines[l].kind {
        LineKind::Candidate => &pm.index.replace,
        LineKind::Potential => &pm.index.build,
        LineKind::Existing => return None,
    };
    list.iter().find(|ch| ch.line == l && on(values, ch.var))
}

fn dismantled_by(pm: &PlanningModel, values: &[f64], l: usize, a: usize) -> bool {
    (1..=a).any(|a1| pm.index.dismantle.get(&(l, a1)).is_some_and(|&d| on(values, d)))
}

/// The original line still carries maintenance in year `a`: not dismantled
/// and not yet superseded by its replacement.
fn in_service(pm: &PlanningModel, values: &[f64], l: usize, a: usize) -> bool {
    let z = pm.lag;
    let replaced = chosen(pm, values, l).is_some_and(|ch| ch.year + z < a);
    !replaced && !dismantled_by(pm, values, l, a)
}

/// Capacity of line `l` in year `a` implied by the decisions alone.
fn decoded_capacity(
    pm: &PlanningModel,
    scenario: &PlanningScenario,
    values: &[f64],
    l: usize,
    a: usize,
) -> f64 {
    let line = &pm.index.lines[l];
    let z = pm.lag;
    if dismantled_by(pm, values, l, a) {
        return 0.0;
    }
    let nominal = match chosen(pm, values, l) {
        Some(ch) if ch.year + z < a => scenario.catalog[ch.cable].capacity,
        _ => line.capacity,
    };
    if !pm.options.tower_constraints {
        return nominal;
    }
    let health = |n: NodeId| scenario.network.node(n).map_or(1.0, |x| x.health_index);
    let replaced = |n: NodeId| {
        a > z && pm.index.tower.get(&n).is_some_and(|&g| on(values, g))
    };
    effective_capacity(
        nominal,
        health(line.from),
        health(line.to),
        replaced(line.from),
        replaced(line.to),
    )
}

fn check_semantics(pm: &PlanningModel, scenario: &PlanningScenario, values: &[f64]) -> Vec<String> {
    let ix = &pm.index;
    let mut out = Vec::new();
    for (&(decision, n), &mu) in &ix.products {
        let expect = on(values, decision) && on(values, ix.tower[&n]);
        if on(values, mu) != expect {
            out.push(format!("product {} differs from its factors", pm.model.var(mu).name));
        }
    }
    for (l, line) in ix.lines.iter().enumerate() {
        for a in 1..=scenario.economics.horizon_years {
            let cap = decoded_capacity(pm, scenario, values, l, a);
            for &p in &ix.flow[l][a - 1] {
                if values[p.index()].abs() > cap + SEMANTIC_TOL * (1.0 + cap) {
                    out.push(format!(
                        "flow {} exceeds capacity {cap} of {} in year {a}",
                        values[p.index()],
                        line.label
                    ));
                }
            }
        }
    }
    let hp = &scenario.heat_pump;
    for (&(n, a, t), &d1) in &ix.heat_traditional {
        let heat = scenario.demand.heat_at(n, a, t);
        let d2 = ix.heat_pump.get(&(n, a, t)).map_or(0.0, |v| values[v.index()]);
        if (values[d1.index()] + d2 - heat).abs() > SEMANTIC_TOL * (1.0 + heat) {
            out.push(format!("heat of node {n} not covered at step {t} of year {a}"));
        }
        if hp.enabled {
            let installed: f64 = (1..=a).map(|a1| values[ix.hp_build[&(n, a1)].index()]).sum();
            if d2 > installed + SEMANTIC_TOL * (1.0 + installed) {
                out.push(format!("heat pumps of node {n} overloaded at step {t} of year {a}"));
            }
        }
    }
    out
}
