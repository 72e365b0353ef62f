//! Scenario to MILP.
//!
//! Per line `l` and year `a` a capacity variable `cap[l,a]` bounds every
//! signed flow `p[l,t,a]` of that year. All health, construction-lag and
//! dismantling logic acts on `cap`, so those rows are per year rather than
//! per time step. The nominal capacity of a line in year `a` is
//!
//! * existing, not a candidate: `E`
//! * replacement candidate: `E + sum_{c, a1 <= a-Z-1} (N_c - E) k[c,a1]`
//! * potential: `sum_{c, a1 <= a-Z-1} N_c y[c,a1]`
//!
//! and tower health scales it (old and new cable alike). A replaced tower
//! restores full health from year `Z+1`. Products of a line decision with a
//! tower decision become binaries `mu` through the product linearization.

use std::collections::BTreeMap;

use gridplan_milp::{
    BinaryProduct, Guard, LinExpr, MilpModel, ObjectiveSense, ReformulationReport, RowTag, Sense,
    VarId,
};
use serde::Serialize;

use super::{crf, discount, learning};
use crate::error::PlanError;
use crate::grid::{NodeId, PlanningScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    /// Emit the tower-health capacity rows. Turning this off leaves the
    /// plain nominal capacity bound.
    pub tower_constraints: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            tower_constraints: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineKind {
    Existing,
    Candidate,
    Potential,
}

/// A line of the planning model: an existing arc or an allowed potential arc.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanLine {
    pub label: String,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: LineKind,
    /// Existing capacity (0 for potential lines).
    pub capacity: f64,
    pub length: f64,
    pub maintenance_cost: f64,
    /// Largest capacity the line can ever have.
    pub max_capacity: f64,
}

/// A replace (`k`) or build (`y`) decision variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LineChoice {
    pub line: usize,
    pub cable: usize,
    pub year: usize,
    pub var: VarId,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarIndex {
    pub lines: Vec<PlanLine>,
    /// `[line][a-1]`.
    pub cap: Vec<Vec<VarId>>,
    /// `[line][a-1][t]`.
    pub flow: Vec<Vec<Vec<VarId>>>,
    pub replace: Vec<LineChoice>,
    pub build: Vec<LineChoice>,
    pub tower: BTreeMap<NodeId, VarId>,
    /// `(line, a) -> delta`.
    pub dismantle: BTreeMap<(usize, usize), VarId>,
    /// `(node, a) -> h`.
    pub hp_build: BTreeMap<(NodeId, usize), VarId>,
    /// `(node, a, t) -> d1`.
    pub heat_traditional: BTreeMap<(NodeId, usize, usize), VarId>,
    /// `(node, a, t) -> d2`.
    pub heat_pump: BTreeMap<(NodeId, usize, usize), VarId>,
    /// `(generator, a, t)`.
    pub generation: BTreeMap<(usize, usize, usize), VarId>,
    pub renewable: BTreeMap<(usize, usize, usize), VarId>,
    pub charge: BTreeMap<(usize, usize, usize), VarId>,
    pub discharge: BTreeMap<(usize, usize, usize), VarId>,
    pub soc: BTreeMap<(usize, usize, usize), VarId>,
    /// `(decision, tower node) -> mu`.
    pub products: BTreeMap<(VarId, NodeId), VarId>,
}

/// Size of the formulation by family.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub variables: usize,
    pub binaries: usize,
    pub replace_vars: usize,
    pub build_vars: usize,
    pub tower_vars: usize,
    pub dismantle_vars: usize,
    pub product_vars: usize,
    pub hp_vars: usize,
    pub capacity_vars: usize,
    pub flow_vars: usize,
    pub heat_vars: usize,
    pub unit_vars: usize,
    pub indicators: usize,
    pub rows_model: usize,
    pub rows_reconstructed: usize,
    pub rows_linearization: usize,
    pub rows_indicator: usize,
    pub rows_total: usize,
    pub big_m_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct PlanningModel {
    pub model: MilpModel,
    pub index: VarIndex,
    pub census: Census,
    pub reformulation: ReformulationReport,
    pub options: ModelOptions,
    /// Construction time of the scenario the model was built from.
    pub lag: usize,
}

struct Builder<'s> {
    s: &'s PlanningScenario,
    opts: ModelOptions,
    m: MilpModel,
    ix: VarIndex,
    pending_products: Vec<BinaryProduct>,
    objective: LinExpr,
}

pub fn build_planning_model(
    scenario: &PlanningScenario,
    options: ModelOptions,
) -> Result<PlanningModel, PlanError> {
    let mut b = Builder {
        s: scenario,
        opts: options,
        m: MilpModel::new(),
        ix: VarIndex::default(),
        pending_products: Vec::new(),
        objective: LinExpr::new(),
    };
    b.lines();
    b.decisions()?;
    b.capacity();
    b.operation()?;
    let obj = b.objective.compact();
    b.m.set_objective(ObjectiveSense::Minimize, &obj);
    let products = std::mem::take(&mut b.pending_products);
    b.m.linearize_products(&products)?;
    let indicators = b.m.indicators.len();
    let report = b.m.reformulate_indicators()?;
    b.m.validate()?;
    let census = census(&b.m, &b.ix, indicators, &report);
    Ok(PlanningModel {
        model: b.m,
        index: b.ix,
        census,
        reformulation: report,
        options,
        lag: scenario.economics.construction_time,
    })
}

fn census(m: &MilpModel, ix: &VarIndex, indicators: usize, rep: &ReformulationReport) -> Census {
    let rows = |tag: RowTag| m.constraints.iter().filter(|c| c.tag == tag).count();
    let flows: usize = ix.flow.iter().flatten().map(Vec::len).sum();
    Census {
        variables: m.num_vars(),
        binaries: m.binaries().count(),
        replace_vars: ix.replace.len(),
        build_vars: ix.build.len(),
        tower_vars: ix.tower.len(),
        dismantle_vars: ix.dismantle.len(),
        product_vars: ix.products.len(),
        hp_vars: ix.hp_build.len(),
        capacity_vars: ix.cap.iter().map(Vec::len).sum(),
        flow_vars: flows,
        heat_vars: ix.heat_traditional.len() + ix.heat_pump.len(),
        unit_vars: ix.generation.len()
            + ix.renewable.len()
            + ix.charge.len()
            + ix.discharge.len()
            + ix.soc.len(),
        indicators,
        rows_model: rows(RowTag::Model),
        rows_reconstructed: rows(RowTag::Reconstructed),
        rows_linearization: rows(RowTag::Linearization),
        rows_indicator: rows(RowTag::Indicator),
        rows_total: m.num_constraints(),
        big_m_dropped: rep.dropped,
    }
}

impl Builder<'_> {
    fn years(&self) -> usize {
        self.s.economics.horizon_years
    }

    fn lag(&self) -> usize {
        self.s.economics.construction_time
    }

    /// Last decision year whose line is usable within the horizon.
    fn last_decision_year(&self) -> usize {
        self.years().saturating_sub(self.lag() + 1)
    }

    fn health(&self, n: NodeId) -> f64 {
        self.s.network.node(n).map_or(1.0, |x| x.health_index)
    }

    fn lines(&mut self) {
        let max_cable = self
            .s
            .catalog
            .iter()
            .map(|c| c.capacity)
            .fold(0.0, f64::max);
        for a in self.s.network.arcs.iter().filter(|a| a.exists) {
            let candidate = a.replacement_candidate && !self.s.catalog.is_empty();
            self.ix.lines.push(PlanLine {
                label: a.label(),
                from: a.from,
                to: a.to,
                kind: if candidate {
                    LineKind::Candidate
                } else {
                    LineKind::Existing
                },
                capacity: a.capacity,
                length: a.length,
                maintenance_cost: a.maintenance_cost,
                max_capacity: if candidate {
                    a.capacity.max(max_cable)
                } else {
                    a.capacity
                },
            });
        }
        for p in self.s.network.potential_arcs.iter().filter(|p| p.allowed) {
            self.ix.lines.push(PlanLine {
                label: p.label(),
                from: p.from,
                to: p.to,
                kind: LineKind::Potential,
                capacity: 0.0,
                length: p.length,
                maintenance_cost: 0.0,
                max_capacity: max_cable,
            });
        }
    }

    fn decisions(&mut self) -> Result<(), PlanError> {
        let e = &self.s.economics;
        let r = e.interest_rate;
        let last = self.last_decision_year();
        for (l, line) in self.ix.lines.clone().iter().enumerate() {
            if line.kind == LineKind::Existing {
                continue;
            }
            let mut exclusive = LinExpr::new();
            for (c, cable) in self.s.catalog.iter().enumerate() {
                let annual = cable.unit_cost * line.length * crf(r, f64::from(cable.life))?;
                for a1 in 1..=last {
                    let (prefix, list) = match line.kind {
                        LineKind::Candidate => ("k", &mut self.ix.replace),
                        _ => ("y", &mut self.ix.build),
                    };
                    let var = self
                        .m
                        .add_binary(format!("{prefix}[{},{},{a1}]", line.label, cable.id));
                    list.push(LineChoice {
                        line: l,
                        cable: c,
                        year: a1,
                        var,
                    });
                    exclusive.add_term(var, 1.0);
                    self.objective.add_term(
                        var,
                        discount(r, a1) * learning(e.learning_rate, a1) * annual,
                    );
                }
            }
            if line.kind == LineKind::Candidate && line.maintenance_cost > 0.0 {
                for a in 1..=self.years() {
                    let d = self.m.add_binary(format!("delta[{},{a}]", line.label));
                    self.ix.dismantle.insert((l, a), d);
                    exclusive.add_term(d, 1.0);
                }
            }
            if !exclusive.terms.is_empty() {
                let name = match line.kind {
                    LineKind::Candidate => format!("one_change[{}]", line.label),
                    _ => format!("one_build[{}]", line.label),
                };
                self.m
                    .add_constraint(name, &exclusive, Sense::Le, 1.0, RowTag::Reconstructed);
            }
        }
        // dismantling of non-candidate lines that cost maintenance
        for (l, line) in self.ix.lines.clone().iter().enumerate() {
            if line.kind == LineKind::Existing && line.maintenance_cost > 0.0 {
                let mut once = LinExpr::new();
                for a in 1..=self.years() {
                    let d = self.m.add_binary(format!("delta[{},{a}]", line.label));
                    self.ix.dismantle.insert((l, a), d);
                    once.add_term(d, 1.0);
                }
                self.m.add_constraint(
                    format!("one_change[{}]", line.label),
                    &once,
                    Sense::Le,
                    1.0,
                    RowTag::Reconstructed,
                );
            }
        }
        for n in &self.s.network.nodes {
            if n.is_replaceable() {
                let g = self.m.add_binary(format!("gamma[{}]", n.id));
                self.ix.tower.insert(n.id, g);
                let annual = crf(r, f64::from(n.replacement_life))? * n.replacement_cost;
                self.objective.add_term(g, annual);
            }
        }
        let hp = &self.s.heat_pump;
        if hp.enabled {
            let hcrf = crf(r, f64::from(hp.life))?;
            for node in self.s.demand.heat_nodes() {
                let peak = self.s.demand.peak_heat(node);
                for a in 1..=self.years() {
                    let h = self.m.add_continuous(format!("h[{node},{a}]"), 0.0, peak);
                    self.ix.hp_build.insert((node, a), h);
                    self.objective
                        .add_term(h, discount(r, a) * hcrf * hp.unit_cost);
                }
            }
        }
        Ok(())
    }

    /// Decisions of line `l` usable in year `a`: `(var, cable capacity)`.
    fn usable(&self, l: usize, a: usize) -> Vec<(VarId, f64)> {
        let list = match self.ix.lines[l].kind {
            LineKind::Candidate => &self.ix.replace,
            LineKind::Potential => &self.ix.build,
            LineKind::Existing => return Vec::new(),
        };
        list.iter()
            .filter(|ch| ch.line == l && ch.year + self.lag() < a)
            .map(|ch| (ch.var, self.s.catalog[ch.cable].capacity))
            .collect()
    }

    /// Nominal capacity expression of line `l` in year `a`.
    fn nominal(&self, l: usize, a: usize) -> LinExpr {
        let line = &self.ix.lines[l];
        let mut e = LinExpr::constant(line.capacity);
        for (v, cap) in self.usable(l, a) {
            e.add_term(v, cap - line.capacity);
        }
        e
    }

    /// Linearized `nominal(l, a) * gamma[n]`.
    fn nominal_times_tower(&mut self, l: usize, a: usize, n: NodeId) -> LinExpr {
        let gamma = self.ix.tower[&n];
        let line_cap = self.ix.lines[l].capacity;
        let mut e = LinExpr::term(gamma, line_cap);
        for (v, cap) in self.usable(l, a) {
            let mu = self.product(v, n);
            e.add_term(mu, cap - line_cap);
        }
        e
    }

    fn product(&mut self, decision: VarId, n: NodeId) -> VarId {
        if let Some(&mu) = self.ix.products.get(&(decision, n)) {
            return mu;
        }
        let name = format!("mu[{},{n}]", self.m.var(decision).name);
        let mu = self.m.add_binary(name);
        self.ix.products.insert((decision, n), mu);
        self.pending_products.push(BinaryProduct {
            left: decision,
            right: self.ix.tower[&n],
            product: mu,
        });
        mu
    }

    fn capacity(&mut self) {
        let years = self.years();
        let steps = self.s.economics.time_steps_per_year;
        for l in 0..self.ix.lines.len() {
            let line = self.ix.lines[l].clone();
            let mut caps = Vec::with_capacity(years);
            let mut flows = Vec::with_capacity(years);
            for a in 1..=years {
                let cap = self.m.add_continuous(
                    format!("cap[{},{a}]", line.label),
                    0.0,
                    line.max_capacity,
                );
                caps.push(cap);
                let nominal = self.nominal(l, a);

                // nominal bound, zeroed once the line is dismantled
                let mut row = LinExpr::term(cap, 1.0);
                row.add_scaled(&nominal, -1.0);
                for a1 in 1..=a {
                    if let Some(&d) = self.ix.dismantle.get(&(l, a1)) {
                        row.add_term(d, line.capacity);
                    }
                }
                self.m.add_constraint(
                    format!("cap_nominal[{},{a}]", line.label),
                    &row,
                    Sense::Le,
                    0.0,
                    RowTag::Reconstructed,
                );

                if self.opts.tower_constraints {
                    self.health_rows(l, a, cap, &nominal);
                }

                let mut year_flows = Vec::with_capacity(steps);
                for t in 0..steps {
                    let p = self.m.add_continuous(
                        format!("p[{},{t},{a}]", line.label),
                        -line.max_capacity,
                        line.max_capacity,
                    );
                    year_flows.push(p);
                    let mut up = LinExpr::term(p, 1.0);
                    up.add_term(cap, -1.0);
                    self.m.add_constraint(
                        format!("flow_up[{},{t},{a}]", line.label),
                        &up,
                        Sense::Le,
                        0.0,
                        RowTag::Reconstructed,
                    );
                    let mut down = LinExpr::term(p, -1.0);
                    down.add_term(cap, -1.0);
                    self.m.add_constraint(
                        format!("flow_down[{},{t},{a}]", line.label),
                        &down,
                        Sense::Le,
                        0.0,
                        RowTag::Reconstructed,
                    );
                }
                flows.push(year_flows);
            }
            self.ix.cap.push(caps);
            self.ix.flow.push(flows);
        }
    }

    fn health_rows(&mut self, l: usize, a: usize, cap: VarId, nominal: &LinExpr) {
        let line = self.ix.lines[l].clone();
        let (i, j) = (line.from, line.to);
        let (hi, hj) = (self.health(i), self.health(j));
        let avg = (hi + hj) / 2.0;
        let gi = self.ix.tower.get(&i).copied();
        let gj = self.ix.tower.get(&j).copied();
        let label = &line.label;

        let penalized = |m: &mut MilpModel, factor: f64, guards: Vec<Guard>, name: String| {
            let mut row = LinExpr::term(cap, 1.0);
            row.add_scaled(nominal, -factor);
            if guards.is_empty() {
                if factor < 1.0 {
                    m.add_constraint(name, &row, Sense::Le, 0.0, RowTag::Model);
                }
            } else {
                m.add_indicator(name, guards, &row, Sense::Le, 0.0, RowTag::Indicator);
            }
        };

        if a <= self.lag() || (gi.is_none() && gj.is_none()) {
            penalized(&mut self.m, avg, vec![], format!("health_avg[{label},{a}]"));
            return;
        }
        // tower i replaced: penalized by the health of j unless j is replaced too
        for (g_here, other, h_other, name) in [(gi, j, hj, "health_i"), (gj, i, hi, "health_j")] {
            let Some(g) = g_here else { continue };
            let mut row = LinExpr::term(cap, 1.0);
            row.add_scaled(nominal, -h_other);
            if self.ix.tower.contains_key(&other) {
                let both = self.nominal_times_tower(l, a, other);
                row.add_scaled(&both, -(1.0 - h_other));
            }
            self.m.add_indicator(
                format!("{name}[{label},{a}]"),
                vec![Guard::new(g, true)],
                &row,
                Sense::Le,
                0.0,
                RowTag::Indicator,
            );
        }
        let guards: Vec<Guard> = [gi, gj]
            .into_iter()
            .flatten()
            .map(|g| Guard::new(g, false))
            .collect();
        penalized(&mut self.m, avg, guards, format!("health_avg[{label},{a}]"));
    }

    fn operation(&mut self) -> Result<(), PlanError> {
        let s = self.s;
        let e = &s.economics;
        let r = e.interest_rate;
        let steps = e.time_steps_per_year;
        let hp = &s.heat_pump;
        let heat_nodes = s.demand.heat_nodes();

        for a in 1..=self.years() {
            let rho = discount(r, a);
            // maintenance of lines still in service
            for (l, line) in self.ix.lines.clone().iter().enumerate() {
                if line.maintenance_cost <= 0.0 {
                    continue;
                }
                let m = rho * line.maintenance_cost;
                self.objective.add_constant(m);
                for a1 in 1..=a {
                    if let Some(&d) = self.ix.dismantle.get(&(l, a1)) {
                        self.objective.add_term(d, -m);
                    }
                }
                for (v, _) in self.usable(l, a) {
                    self.objective.add_term(v, -m);
                }
            }

            for t in 0..steps {
                let w = s.demand.step_weight[t];
                let mut balance: BTreeMap<NodeId, LinExpr> = s
                    .network
                    .nodes
                    .iter()
                    .map(|n| (n.id, LinExpr::new()))
                    .collect();
                for (l, line) in self.ix.lines.iter().enumerate() {
                    let p = self.ix.flow[l][a - 1][t];
                    balance.get_mut(&line.to).unwrap().add_term(p, 1.0);
                    balance.get_mut(&line.from).unwrap().add_term(p, -1.0);
                }
                for (u, g) in s.network.generators.iter().enumerate() {
                    let v = self
                        .m
                        .add_continuous(format!("g[{u},{t},{a}]"), 0.0, g.capacity);
                    self.ix.generation.insert((u, a, t), v);
                    balance.get_mut(&g.node).unwrap().add_term(v, 1.0);
                    self.objective.add_term(v, rho * w * e.generation_cost);
                }
                for (u, g) in s.network.renewables.iter().enumerate() {
                    let avail = if g.enabled {
                        g.capacity * g.availability[t]
                    } else {
                        0.0
                    };
                    let v = self.m.add_continuous(format!("ren[{u},{t},{a}]"), 0.0, avail);
                    self.ix.renewable.insert((u, a, t), v);
                    balance.get_mut(&g.node).unwrap().add_term(v, 1.0);
                }
                for (u, st) in s.network.storage.iter().enumerate() {
                    let ch = self
                        .m
                        .add_continuous(format!("ch[{u},{t},{a}]"), 0.0, st.power);
                    let dis = self
                        .m
                        .add_continuous(format!("dis[{u},{t},{a}]"), 0.0, st.power);
                    let soc = self
                        .m
                        .add_continuous(format!("soc[{u},{t},{a}]"), 0.0, st.energy);
                    self.ix.charge.insert((u, a, t), ch);
                    self.ix.discharge.insert((u, a, t), dis);
                    self.ix.soc.insert((u, a, t), soc);
                    let b = balance.get_mut(&st.node).unwrap();
                    b.add_term(dis, 1.0).add_term(ch, -1.0);
                }
                for n in &s.network.nodes {
                    let risk = n.risk(a);
                    let demand = s.demand.electric_at(n.id, a, t);
                    if heat_nodes.contains(&n.id) {
                        let heat = s.demand.heat_at(n.id, a, t);
                        let d1 = self.m.add_continuous(
                            format!("d1[{},{t},{a}]", n.id),
                            if hp.enabled { 0.0 } else { heat },
                            heat,
                        );
                        self.ix.heat_traditional.insert((n.id, a, t), d1);
                        balance.get_mut(&n.id).unwrap().add_term(d1, -risk);
                        if hp.enabled {
                            let d2 = self
                                .m
                                .add_continuous(format!("d2[{},{t},{a}]", n.id), 0.0, heat);
                            self.ix.heat_pump.insert((n.id, a, t), d2);
                            balance.get_mut(&n.id).unwrap().add_term(d2, -risk / hp.cop);
                            let mut cover = LinExpr::term(d1, 1.0);
                            cover.add_term(d2, 1.0);
                            self.m.add_constraint(
                                format!("heat_cover[{},{t},{a}]", n.id),
                                &cover,
                                Sense::Eq,
                                heat,
                                RowTag::Model,
                            );
                            let mut installed = LinExpr::term(d2, 1.0);
                            for a1 in 1..=a {
                                installed.add_term(self.ix.hp_build[&(n.id, a1)], -1.0);
                            }
                            self.m.add_constraint(
                                format!("hp_capacity[{},{t},{a}]", n.id),
                                &installed,
                                Sense::Le,
                                0.0,
                                RowTag::Model,
                            );
                        }
                    }
                    let row = balance.remove(&n.id).unwrap();
                    self.m.add_constraint(
                        format!("balance[{},{t},{a}]", n.id),
                        &row,
                        Sense::Eq,
                        risk * demand,
                        RowTag::Model,
                    );
                }
            }
            // storage cycles over the representative steps of the year
            for (u, st) in s.network.storage.iter().enumerate() {
                for t in 0..steps {
                    let prev = if t == 0 { steps - 1 } else { t - 1 };
                    let mut row = LinExpr::term(self.ix.soc[&(u, a, t)], 1.0);
                    row.add_term(self.ix.soc[&(u, a, prev)], -1.0)
                        .add_term(self.ix.charge[&(u, a, t)], -st.efficiency)
                        .add_term(self.ix.discharge[&(u, a, t)], 1.0 / st.efficiency);
                    self.m.add_constraint(
                        format!("soc[{u},{t},{a}]"),
                        &row,
                        Sense::Eq,
                        0.0,
                        RowTag::Reconstructed,
                    );
                }
            }
        }
        Ok(())
    }
}
