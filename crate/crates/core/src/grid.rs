//! Network, demand and economic data, and scenario validation.
//!
//! Units: MW for power, MWh for energy, k€ for money, km for length.
//! Years are 1-based (`a = 1..=horizon_years`), time steps 0-based.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::risk::{score_risk, RiskFactor};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerNode {
    pub id: NodeId,
    /// In (0, 1]; multiplies the capacity of incident lines while the
    /// tower is not replaced.
    pub health_index: f64,
    /// Per-year share of demand that must be served. Empty means 1.
    #[serde(default)]
    pub risk_by_year: Vec<f64>,
    /// Per-year risk factors. When non-empty, they take precedence over
    /// `risk_by_year`.
    #[serde(default)]
    pub risk_factors: Vec<Vec<RiskFactor>>,
    /// Tower replacement cost. Only towers with a positive cost are
    /// replacement candidates.
    pub replacement_cost: f64,
    pub replacement_life: u32,
    #[serde(default)]
    pub has_generator: bool,
    #[serde(default)]
    pub has_renewable: bool,
    #[serde(default)]
    pub has_storage: bool,
}

impl TowerNode {
    pub fn new(id: NodeId, health_index: f64) -> Self {
        Self {
            id,
            health_index,
            risk_by_year: Vec::new(),
            risk_factors: Vec::new(),
            replacement_cost: 0.0,
            replacement_life: 40,
            has_generator: false,
            has_renewable: false,
            has_storage: false,
        }
    }

    pub fn is_replaceable(&self) -> bool {
        self.replacement_cost > 0.0
    }

    /// Risk in year `a` (1-based).
    pub fn risk(&self, a: usize) -> f64 {
        if let Some(factors) = self.risk_factors.get(a - 1) {
            if let Ok(r) = score_risk(factors) {
                return r;
            }
        }
        self.risk_by_year.get(a - 1).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineArc {
    pub from: NodeId,
    pub to: NodeId,
    /// MW.
    pub capacity: f64,
    /// km.
    pub length: f64,
    /// k€ per year while the line is in service.
    #[serde(default)]
    pub maintenance_cost: f64,
    /// The line may be replaced by a catalog cable.
    #[serde(default)]
    pub replacement_candidate: bool,
    #[serde(default = "yes")]
    pub exists: bool,
}

fn yes() -> bool {
    true
}

impl LineArc {
    pub fn new(from: NodeId, to: NodeId, capacity: f64) -> Self {
        Self {
            from,
            to,
            capacity,
            length: 1.0,
            maintenance_cost: 0.0,
            replacement_candidate: false,
            exists: true,
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableType {
    pub id: String,
    /// MW.
    pub capacity: f64,
    /// k€ per km.
    pub unit_cost: f64,
    pub life: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialArc {
    pub from: NodeId,
    pub to: NodeId,
    #[serde(default = "yes")]
    pub allowed: bool,
    pub length: f64,
}

impl PotentialArc {
    pub fn label(&self) -> String {
        format!("{}-{}", self.from, self.to)
    }
}

/// Dispatchable unit; its energy is priced at `EconomicParams::generation_cost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub node: NodeId,
    pub capacity: f64,
}

/// Zero marginal cost unit with a per-step availability factor in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Renewable {
    pub node: NodeId,
    pub capacity: f64,
    pub availability: Vec<f64>,
    /// Switched off by the renewable toggle of a sweep.
    #[serde(default = "yes")]
    pub enabled: bool,
}

/// Storage cycled over the representative steps of each year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Storage {
    pub node: NodeId,
    /// MW, charge and discharge.
    pub power: f64,
    /// MWh.
    pub energy: f64,
    /// One-way efficiency in (0, 1].
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub nodes: Vec<TowerNode>,
    pub arcs: Vec<LineArc>,
    #[serde(default)]
    pub potential_arcs: Vec<PotentialArc>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub renewables: Vec<Renewable>,
    #[serde(default)]
    pub storage: Vec<Storage>,
}

impl Network {
    pub fn node(&self, id: NodeId) -> Option<&TowerNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut TowerNode> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    /// Number of existing arcs incident to `id`.
    pub fn degree(&self, id: NodeId) -> usize {
        self.arcs
            .iter()
            .filter(|a| a.exists && (a.from == id || a.to == id))
            .count()
    }
}

/// Values for one node, indexed `[year - 1][step]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSeries {
    pub node: NodeId,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandProfile {
    /// MW.
    pub electric: Vec<NodeSeries>,
    /// MW thermal.
    #[serde(default)]
    pub heat: Vec<NodeSeries>,
    /// Hours represented by each step; sums to 8760.
    pub step_weight: Vec<f64>,
}

impl DemandProfile {
    fn lookup(series: &[NodeSeries], node: NodeId, a: usize, t: usize) -> f64 {
        series
            .iter()
            .find(|s| s.node == node)
            .and_then(|s| s.values.get(a - 1))
            .and_then(|y| y.get(t))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn electric_at(&self, node: NodeId, a: usize, t: usize) -> f64 {
        Self::lookup(&self.electric, node, a, t)
    }

    pub fn heat_at(&self, node: NodeId, a: usize, t: usize) -> f64 {
        Self::lookup(&self.heat, node, a, t)
    }

    /// Largest heat demand of `node` over the horizon.
    pub fn peak_heat(&self, node: NodeId) -> f64 {
        self.heat
            .iter()
            .filter(|s| s.node == node)
            .flat_map(|s| s.values.iter().flatten())
            .fold(0.0, |m, &v| f64::max(m, v))
    }

    pub fn heat_nodes(&self) -> BTreeSet<NodeId> {
        self.heat
            .iter()
            .filter(|s| s.values.iter().flatten().any(|&v| v > 0.0))
            .map(|s| s.node)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatPumpSpec {
    pub enabled: bool,
    pub cop: f64,
    /// k€ per MW thermal.
    pub unit_cost: f64,
    pub life: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicParams {
    pub interest_rate: f64,
    pub learning_rate: f64,
    /// k€ per MWh of dispatchable generation.
    pub generation_cost: f64,
    pub horizon_years: usize,
    /// Years between a line decision and the line being usable; also the
    /// delay before a replaced tower restores full health.
    pub construction_time: usize,
    pub time_steps_per_year: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureMetadata {
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub calibration: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningScenario {
    pub name: String,
    pub network: Network,
    pub economics: EconomicParams,
    pub catalog: Vec<CableType>,
    pub demand: DemandProfile,
    pub heat_pump: HeatPumpSpec,
    #[serde(default)]
    pub metadata: FixtureMetadata,
}

impl PlanningScenario {
    pub fn years(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.economics.horizon_years
    }

    pub fn steps(&self) -> std::ops::Range<usize> {
        0..self.economics.time_steps_per_year
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    /// Element the violation refers to, e.g. `node 2` or `arc 6-8`.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            subject: subject.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// Lists every invariant violation; an empty report means the scenario is
/// well-formed.
pub fn validate_scenario(s: &PlanningScenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    let e = &s.economics;
    let years = e.horizon_years;
    let steps = e.time_steps_per_year;

    if years < 1 {
        r.push("economics", "horizon_years must be at least 1");
    }
    if steps < 1 {
        r.push("economics", "time_steps_per_year must be at least 1");
    }
    if !(0.0..1.0).contains(&e.interest_rate) {
        r.push("economics", "interest_rate out of [0,1)");
    }
    if !(0.0..1.0).contains(&e.learning_rate) {
        r.push("economics", "learning_rate out of [0,1)");
    }
    if !(e.generation_cost >= 0.0) {
        r.push("economics", "generation_cost must be non-negative");
    }

    let mut ids = HashSet::new();
    for n in &s.network.nodes {
        let subject = format!("node {}", n.id);
        if !ids.insert(n.id) {
            r.push(&subject, "duplicate node id");
        }
        if !(n.health_index > 0.0 && n.health_index <= 1.0) {
            r.push(&subject, "health_index out of (0,1]");
        }
        if !n.risk_by_year.is_empty() && n.risk_by_year.len() != years {
            r.push(&subject, "risk_by_year length differs from horizon");
        }
        if n.risk_by_year.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            r.push(&subject, "risk out of (0,1]");
        }
        if !n.risk_factors.is_empty() {
            if n.risk_factors.len() != years {
                r.push(&subject, "risk_factors length differs from horizon");
            }
            for (a, fs) in n.risk_factors.iter().enumerate() {
                if let Err(err) = score_risk(fs) {
                    r.push(&subject, format!("risk factors of year {}: {err}", a + 1));
                }
            }
        }
        if n.replacement_life < 1 {
            r.push(&subject, "replacement_life must be at least 1");
        }
        if !(n.replacement_cost >= 0.0) {
            r.push(&subject, "replacement_cost must be non-negative");
        }
    }

    let known = |id: NodeId| ids.contains(&id);
    let mut pairs = HashSet::new();
    for a in &s.network.arcs {
        let subject = format!("arc {}", a.label());
        if a.from == a.to {
            r.push(&subject, "self loop");
        }
        if !known(a.from) || !known(a.to) {
            r.push(&subject, "unknown endpoint");
        }
        if !pairs.insert(pair(a.from, a.to)) {
            r.push(&subject, "duplicate arc");
        }
        if a.exists && !(a.capacity > 0.0) {
            r.push(&subject, "capacity must be positive");
        }
        if !(a.length > 0.0) {
            r.push(&subject, "length must be positive");
        }
        if !(a.maintenance_cost >= 0.0) {
            r.push(&subject, "maintenance_cost must be non-negative");
        }
        if a.replacement_candidate && !a.exists {
            r.push(&subject, "replacement candidate does not exist");
        }
    }
    for p in &s.network.potential_arcs {
        let subject = format!("potential arc {}", p.label());
        if p.from == p.to {
            r.push(&subject, "self loop");
        }
        if !known(p.from) || !known(p.to) {
            r.push(&subject, "unknown endpoint");
        }
        if p.allowed && s.network.arcs.iter().any(|a| a.exists && pair(a.from, a.to) == pair(p.from, p.to)) {
            r.push(&subject, "existing arc between the pair");
        }
        if !pairs.insert(pair(p.from, p.to)) && !s.network.arcs.iter().any(|a| pair(a.from, a.to) == pair(p.from, p.to)) {
            r.push(&subject, "duplicate arc");
        }
        if !(p.length > 0.0) {
            r.push(&subject, "length must be positive");
        }
    }

    let mut cable_ids = HashSet::new();
    for c in &s.catalog {
        let subject = format!("cable {}", c.id);
        if !cable_ids.insert(c.id.as_str()) {
            r.push(&subject, "duplicate cable id");
        }
        if !(c.capacity > 0.0) {
            r.push(&subject, "capacity must be positive");
        }
        if !(c.unit_cost > 0.0) {
            r.push(&subject, "unit_cost must be positive");
        }
        if c.life < 1 {
            r.push(&subject, "life must be at least 1");
        }
    }

    for g in &s.network.generators {
        let subject = format!("generator at {}", g.node);
        if !known(g.node) {
            r.push(&subject, "unknown node");
        } else if !s.network.node(g.node).is_some_and(|n| n.has_generator) {
            r.push(&subject, "node is not flagged has_generator");
        }
        if !(g.capacity >= 0.0) {
            r.push(&subject, "capacity must be non-negative");
        }
    }
    for g in &s.network.renewables {
        let subject = format!("renewable at {}", g.node);
        if !known(g.node) {
            r.push(&subject, "unknown node");
        } else if !s.network.node(g.node).is_some_and(|n| n.has_renewable) {
            r.push(&subject, "node is not flagged has_renewable");
        }
        if g.availability.len() != steps {
            r.push(&subject, "availability length differs from time steps");
        }
        if g.availability.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            r.push(&subject, "availability out of [0,1]");
        }
    }
    for st in &s.network.storage {
        let subject = format!("storage at {}", st.node);
        if !known(st.node) {
            r.push(&subject, "unknown node");
        } else if !s.network.node(st.node).is_some_and(|n| n.has_storage) {
            r.push(&subject, "node is not flagged has_storage");
        }
        if !(st.efficiency > 0.0 && st.efficiency <= 1.0) {
            r.push(&subject, "efficiency out of (0,1]");
        }
        if !(st.power >= 0.0 && st.energy >= 0.0) {
            r.push(&subject, "power and energy must be non-negative");
        }
    }

    let d = &s.demand;
    if d.step_weight.len() != steps {
        r.push("demand", "step_weight length differs from time steps");
    } else if (d.step_weight.iter().sum::<f64>() - 8760.0).abs() > 1e-6 {
        r.push("demand", "step weights do not sum to 8760");
    }
    for (kind, series) in [("electric", &d.electric), ("heat", &d.heat)] {
        let mut seen = HashSet::new();
        for ns in series {
            let subject = format!("{kind} demand at {}", ns.node);
            if !known(ns.node) {
                r.push(&subject, "unknown node");
            }
            if !seen.insert(ns.node) {
                r.push(&subject, "duplicate series");
            }
            if ns.values.len() != years || ns.values.iter().any(|y| y.len() != steps) {
                r.push(&subject, "shape differs from horizon x steps");
            }
            if ns.values.iter().flatten().any(|&v| !(v >= 0.0)) {
                r.push(&subject, "negative or non-finite value");
            }
        }
    }

    let hp = &s.heat_pump;
    if !(hp.cop > 0.0) {
        r.push("heat pump", "cop must be positive");
    }
    if hp.life < 1 {
        r.push("heat pump", "life must be at least 1");
    }
    if !(hp.unit_cost >= 0.0) {
        r.push("heat pump", "unit_cost must be non-negative");
    }
    r
}

/// Linear growth of one node's electric and heat demand from its year-1
/// values: year `a` equals year 1 times `1 + rate (a - 1)`.
pub fn grow_demand(
    profile: &DemandProfile,
    node: NodeId,
    rate: f64,
) -> Result<DemandProfile, GridError> {
    if !(rate >= -1.0) {
        return Err(GridError::InvalidRate(rate));
    }
    let mut out = profile.clone();
    let mut found = false;
    for series in [&mut out.electric, &mut out.heat] {
        for ns in series.iter_mut().filter(|s| s.node == node) {
            found = true;
            let Some(base) = ns.values.first().cloned() else {
                continue;
            };
            for (k, year) in ns.values.iter_mut().enumerate() {
                let f = 1.0 + rate * k as f64;
                *year = base.iter().map(|v| v * f).collect();
            }
        }
    }
    if found {
        Ok(out)
    } else {
        Err(GridError::UnknownNode(node))
    }
}
