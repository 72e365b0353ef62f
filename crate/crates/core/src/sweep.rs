//! Parameter sweeps over a base scenario, plan diffs and decision tables.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use gridplan_milp::{MilpStatus, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::expansion::{solve_scenario, Action, Decision, ExpansionPlan, ModelOptions};
use crate::grid::{grow_demand, NodeId, PlanningScenario};
use crate::io;

/// A scenario parameter a sweep can set.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamPath {
    HeatPumpCop,
    HeatPumpCost,
    CableCostScale,
    LineLengthScale,
    NodeHealth(NodeId),
    NodeRisk(NodeId),
    ConstructionTime,
    LearningRate,
    InterestRate,
    DemandGrowth(NodeId),
}

impl ParamPath {
    pub fn parse(path: &str) -> Result<Self, SweepError> {
        let unknown = || SweepError::UnknownPath(path.to_string());
        let node = |s: &str| s.parse::<NodeId>().map_err(|_| unknown());
        let parts: Vec<&str> = path.split('.').collect();
        Ok(match parts.as_slice() {
            ["heat_pump", "cop"] => Self::HeatPumpCop,
            ["heat_pump", "unit_cost"] => Self::HeatPumpCost,
            ["catalog", "cost_scale"] => Self::CableCostScale,
            ["lines", "length_scale"] => Self::LineLengthScale,
            ["economics", "construction_time"] => Self::ConstructionTime,
            ["economics", "learning_rate"] => Self::LearningRate,
            ["economics", "interest_rate"] => Self::InterestRate,
            ["node", id, "health"] => Self::NodeHealth(node(id)?),
            ["node", id, "risk"] => Self::NodeRisk(node(id)?),
            ["demand", id, "growth"] => Self::DemandGrowth(node(id)?),
            _ => return Err(unknown()),
        })
    }

    /// Sets the parameter on `s`.
    pub fn apply(&self, s: &mut PlanningScenario, value: f64, path: &str) -> Result<(), SweepError> {
        let unknown = || SweepError::UnknownPath(path.to_string());
        match *self {
            Self::HeatPumpCop => s.heat_pump.cop = value,
            Self::HeatPumpCost => s.heat_pump.unit_cost = value,
            Self::CableCostScale => {
                for c in &mut s.catalog {
                    c.unit_cost *= value;
                }
            }
            Self::LineLengthScale => {
                for a in &mut s.network.arcs {
                    a.length *= value;
                }
                for p in &mut s.network.potential_arcs {
                    p.length *= value;
                }
            }
            Self::NodeHealth(id) => s.network.node_mut(id).ok_or_else(unknown)?.health_index = value,
            Self::NodeRisk(id) => {
                let years = s.economics.horizon_years;
                let n = s.network.node_mut(id).ok_or_else(unknown)?;
                n.risk_factors.clear();
                n.risk_by_year = vec![value; years];
            }
            Self::ConstructionTime => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(unknown());
                }
                s.economics.construction_time = value as usize;
            }
            Self::LearningRate => s.economics.learning_rate = value,
            Self::InterestRate => s.economics.interest_rate = value,
            Self::DemandGrowth(id) => {
                s.demand = grow_demand(&s.demand, id, value).map_err(|_| unknown())?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// e.g. `heat_pump.cop`, `node.8.risk`, `demand.8.growth`.
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    /// Cartesian product, first axis slowest.
    #[default]
    Grid,
    /// Values paired by position; all axes must have the same length.
    Zip,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggles {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_pump: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewables: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    /// Bundled fixture name, or a scenario path relative to the sweep file.
    pub base: String,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub combine: Combine,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
}

impl SweepSpec {
    /// One axis over `values` with no toggles.
    pub fn single(name: &str, base: &str, path: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            base: base.to_string(),
            axes: vec![Axis {
                path: path.to_string(),
                values,
            }],
            combine: Combine::Grid,
            toggles: Toggles::default(),
            gap: None,
            time_limit_s: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|source| io_read(path, source))?;
        Ok(serde_json::from_str(&text).map_err(crate::error::IoError::from)?)
    }

    /// Resolves `base` to a scenario; paths are relative to `spec_dir`.
    pub fn load_base(&self, spec_dir: &Path) -> Result<PlanningScenario, SweepError> {
        if io::FIXTURES.contains(&self.base.as_str()) {
            return Ok(io::fixture(&self.base)?);
        }
        Ok(io::load_scenario(&spec_dir.join(&self.base))?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::default();
        if let Some(g) = self.gap {
            c.gap_tol = g;
        }
        c.time_limit = self.time_limit_s.map(Duration::from_secs_f64);
        c
    }

    /// Axis values of every point, in sweep order.
    pub fn points(&self) -> Result<Vec<Vec<f64>>, SweepError> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(SweepError::EmptyValues);
        }
        match self.combine {
            Combine::Zip => {
                let n = self.axes[0].values.len();
                if self.axes.iter().any(|a| a.values.len() != n) {
                    return Err(SweepError::MismatchedAxes);
                }
                Ok((0..n)
                    .map(|i| self.axes.iter().map(|a| a.values[i]).collect())
                    .collect())
            }
            Combine::Grid => {
                let mut points = vec![Vec::new()];
                for axis in &self.axes {
                    points = points
                        .into_iter()
                        .flat_map(|p| {
                            axis.values.iter().map(move |&v| {
                                let mut q = p.clone();
                                q.push(v);
                                q
                            })
                        })
                        .collect();
                }
                Ok(points)
            }
        }
    }

    /// Base scenario with toggles applied and each axis set to `values`.
    pub fn scenario_at(
        &self,
        base: &PlanningScenario,
        values: &[f64],
    ) -> Result<PlanningScenario, SweepError> {
        let mut s = base.clone();
        if let Some(on) = self.toggles.heat_pump {
            s.heat_pump.enabled = on;
        }
        if let Some(on) = self.toggles.renewables {
            for r in &mut s.network.renewables {
                r.enabled = on;
            }
        }
        for (axis, &v) in self.axes.iter().zip(values) {
            ParamPath::parse(&axis.path)?.apply(&mut s, v, &axis.path)?;
        }
        s.name = format!("{}[{}]", base.name, format_values(values));
        Ok(s)
    }
}

fn io_read(path: &Path, source: std::io::Error) -> SweepError {
    crate::error::IoError::Read {
        path: path.display().to_string(),
        source,
    }
    .into()
}

fn format_values(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| num(*v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Locale-free fixed formatting used by every report.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub nodes: usize,
    pub lp_iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    /// Solver status, or `error`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ExpansionPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<PointStats>,
}

impl SweepPoint {
    pub fn is_optimal(&self) -> bool {
        self.status == MilpStatus::Optimal.as_str() && self.plan.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub axes: Vec<String>,
    /// In the order given by the sweep file.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn all_optimal(&self) -> bool {
        self.points.iter().all(SweepPoint::is_optimal)
    }

    pub fn investment_series(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.plan.as_ref().map(|x| x.investment_cost))
            .collect()
    }

    pub fn operational_series(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.plan.as_ref().map(|x| x.operational_cost))
            .collect()
    }

    pub fn total_series(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.plan.as_ref().map(|x| x.total_cost))
            .collect()
    }
}

/// Solves every point with the same solver settings. A failing point is
/// recorded and does not stop the others. Results keep the sweep file order.
pub fn run_sweep(
    spec: &SweepSpec,
    base: &PlanningScenario,
    config: &SolverConfig,
    workers: usize,
) -> Result<SweepResult, SweepError> {
    let points = spec.points()?;
    // resolve every path before spending time on solves
    for values in &points {
        spec.scenario_at(base, values)?;
    }
    let solve_point = |values: &Vec<f64>| -> SweepPoint {
        let scenario = match spec.scenario_at(base, values) {
            Ok(s) => s,
            Err(e) => return failed(values, e.to_string()),
        };
        match solve_scenario(&scenario, ModelOptions::default(), config) {
            Ok(r) => SweepPoint {
                values: values.clone(),
                status: r.solution.status.as_str().to_string(),
                plan: r.plan,
                error: None,
                stats: Some(PointStats {
                    nodes: r.solution.stats.nodes,
                    lp_iterations: r.solution.stats.lp_iterations,
                }),
            },
            Err(e) => failed(values, e.to_string()),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let solved: Vec<SweepPoint> = pool.install(|| points.par_iter().map(solve_point).collect());
    Ok(SweepResult {
        name: spec.name.clone(),
        axes: spec.axes.iter().map(|a| a.path.clone()).collect(),
        points: solved,
    })
}

fn failed(values: &[f64], error: String) -> SweepPoint {
    SweepPoint {
        values: values.to_vec(),
        status: "error".to_string(),
        plan: None,
        error: Some(error),
        stats: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retimed {
    pub action: Action,
    pub location: String,
    pub cable: Option<String>,
    pub from_year: usize,
    pub to_year: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionDelta {
    /// In `b` only.
    pub added: Vec<Decision>,
    /// In `a` only.
    pub removed: Vec<Decision>,
    pub retimed: Vec<Retimed>,
    /// `b - a`.
    pub investment_delta: f64,
    pub operational_delta: f64,
    pub total_delta: f64,
    pub objective_delta: f64,
}

impl DecisionDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.retimed.is_empty()
    }
}

fn same_capacity(x: Option<f64>, y: Option<f64>) -> bool {
    match (x, y) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0),
        (None, None) => true,
        _ => false,
    }
}

/// Decisions added, removed or moved to another year going from `a` to `b`,
/// with signed cost changes.
pub fn diff_plans(a: &ExpansionPlan, b: &ExpansionPlan) -> Result<DecisionDelta, SweepError> {
    if a.lines != b.lines {
        return Err(SweepError::TopologyMismatch(format!(
            "[{}] vs [{}]",
            a.lines.join(" "),
            b.lines.join(" ")
        )));
    }
    let mut left: Vec<Option<&Decision>> = a.decisions.iter().map(Some).collect();
    let mut right: Vec<Option<&Decision>> = b.decisions.iter().map(Some).collect();
    let matches = |x: &Decision, y: &Decision, same_year: bool| {
        x.action == y.action
            && x.location == y.location
            && x.cable == y.cable
            && same_capacity(x.capacity, y.capacity)
            && (x.year == y.year) == same_year
    };
    let mut retimed = Vec::new();
    for same_year in [true, false] {
        for l in left.iter_mut() {
            let Some(x) = *l else { continue };
            if let Some(r) = right.iter_mut().find(|r| r.is_some_and(|y| matches(x, y, same_year))) {
                let y = r.take().unwrap();
                *l = None;
                if !same_year {
                    retimed.push(Retimed {
                        action: x.action,
                        location: x.location.clone(),
                        cable: x.cable.clone(),
                        from_year: x.year,
                        to_year: y.year,
                    });
                }
            }
        }
    }
    Ok(DecisionDelta {
        added: right.into_iter().flatten().cloned().collect(),
        removed: left.into_iter().flatten().cloned().collect(),
        retimed,
        investment_delta: b.investment_cost - a.investment_cost,
        operational_delta: b.operational_cost - a.operational_cost,
        total_delta: b.total_cost - a.total_cost,
        objective_delta: b.objective - a.objective,
    })
}

const TABLE_COLUMNS: [&str; 5] = ["year", "action", "location", "cable", "capacity"];

fn decision_cells(d: &Decision) -> [String; 5] {
    [
        d.year.to_string(),
        d.action.as_str().to_string(),
        d.location.clone(),
        d.cable.clone().unwrap_or_else(|| "-".to_string()),
        d.capacity.map_or_else(|| "-".to_string(), num),
    ]
}

/// Fixed-width text and CSV renderings of a decision table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    pub text: String,
    pub csv: String,
}

/// Decision table of one plan, rows sorted by `(year, action, location)`.
pub fn render_plan_table(plan: &ExpansionPlan) -> DecisionTable {
    table(&[], &[(Vec::new(), plan)])
}

/// Decision table of every point with a plan, prefixed by the axis values.
pub fn render_decision_table(result: &SweepResult) -> DecisionTable {
    let rows: Vec<(Vec<String>, &ExpansionPlan)> = result
        .points
        .iter()
        .filter_map(|p| p.plan.as_ref().map(|plan| (p.values.iter().map(|v| num(*v)).collect(), plan)))
        .collect();
    table(&result.axes, &rows)
}

fn table(prefix: &[String], plans: &[(Vec<String>, &ExpansionPlan)]) -> DecisionTable {
    let header: Vec<String> = prefix
        .iter()
        .cloned()
        .chain(TABLE_COLUMNS.iter().map(|c| c.to_string()))
        .collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (values, plan) in plans {
        let mut decisions: Vec<&Decision> = plan.decisions.iter().collect();
        decisions.sort_by(|x, y| {
            (x.year, x.action, &x.location, &x.cable).cmp(&(y.year, y.action, &y.location, &y.cable))
        });
        for d in decisions {
            rows.push(values.iter().cloned().chain(decision_cells(d)).collect());
        }
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = String::new();
    let line = |cells: &[String], out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&header, &mut text);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule, &mut text);
    for r in &rows {
        line(r, &mut text);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory csv");
    for r in &rows {
        w.write_record(r).expect("in-memory csv");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv");
    DecisionTable { text, csv }
}

/// One row per point: axis values, status, costs, decision counts and the
/// z-score of the total cost across points with a plan.
pub fn summary_csv(result: &SweepResult) -> String {
    let totals: Vec<f64> = result.total_series().into_iter().flatten().collect();
    let n = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / n.max(1.0);
    let sd = (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n.max(1.0)).sqrt();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = result
        .axes
        .iter()
        .cloned()
        .chain(
            [
                "status",
                "ic",
                "oc",
                "total",
                "n_new_lines",
                "n_replacements",
                "n_dismantles",
                "n_tower_replacements",
                "total_hp_MW",
                "total_zscore",
            ]
            .map(String::from),
        )
        .collect();
    w.write_record(&header).expect("in-memory csv");
    for p in &result.points {
        let mut row: Vec<String> = p.values.iter().map(|v| num(*v)).collect();
        row.push(p.status.clone());
        match &p.plan {
            Some(plan) => {
                let z = if sd > 0.0 { (plan.total_cost - mean) / sd } else { 0.0 };
                row.extend([
                    num(plan.investment_cost),
                    num(plan.operational_cost),
                    num(plan.total_cost),
                    plan.count(Action::NewLine).to_string(),
                    plan.count(Action::ReplaceLine).to_string(),
                    plan.count(Action::Dismantle).to_string(),
                    plan.count(Action::ReplaceTower).to_string(),
                    num(plan.total_hp_mw()),
                    num(z),
                ]);
            }
            None => row.extend(std::iter::repeat_n(String::new(), 9)),
        }
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}
