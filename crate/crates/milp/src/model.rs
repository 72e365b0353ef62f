//! Solver-agnostic intermediate representation of a mixed-integer linear model.
//!
//! A [`MilpModel`] holds variables with explicit bounds, linear rows,
//! indicator constraints and the record of linearized binary products. The
//! reformulation passes in [`crate::reformulate`] turn indicators into plain
//! rows; the original indicator and product semantics are kept on the model
//! so that every solution can be checked against them afterwards.

use std::collections::HashMap;
use std::fmt;

use crate::error::ModelError;

/// Index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Where a row comes from. Reconstructed base-model rows are tagged so they
/// can be audited separately from the condition-aware rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    Model,
    Reconstructed,
    Linearization,
    Indicator,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowTag::Model => "model",
            RowTag::Reconstructed => "reconstructed",
            RowTag::Linearization => "linearization",
            RowTag::Indicator => "indicator",
        })
    }
}

/// Sparse linear expression `sum(coef * var) + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        Self {
            terms: vec![(var, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) -> &mut Self {
        self.terms.push((var, coef));
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &LinExpr, factor: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.terms.push((v, c * factor));
        }
        self.constant += other.constant * factor;
        self
    }

    pub fn scaled(&self, factor: f64) -> LinExpr {
        let mut out = LinExpr::new();
        out.add_scaled(self, factor);
        out
    }

    /// Merges duplicate variables and drops exact zeros. Term order follows
    /// the first occurrence of each variable, which keeps model output
    /// deterministic.
    pub fn compact(&self) -> LinExpr {
        let mut pos: HashMap<VarId, usize> = HashMap::with_capacity(self.terms.len());
        let mut terms: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in &self.terms {
            match pos.get(&v) {
                Some(&i) => terms[i].1 += c,
                None => {
                    pos.insert(v, terms.len());
                    terms.push((v, c));
                }
            }
        }
        terms.retain(|&(_, c)| c != 0.0);
        LinExpr {
            terms,
            constant: self.constant,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// One literal of an indicator guard: `var == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Guard {
    pub var: VarId,
    pub value: bool,
}

impl Guard {
    pub fn new(var: VarId, value: bool) -> Self {
        Self { var, value }
    }

    pub fn holds(&self, values: &[f64]) -> bool {
        let v = values[self.var.0] >= 0.5;
        v == self.value
    }
}

/// `guard_1 and guard_2 and ... => terms (sense) rhs`.
///
/// The common case is a single guard; a conjunction is used where a row must
/// be relaxed when any of several binaries flips.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorConstraint {
    pub name: String,
    pub guards: Vec<Guard>,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

impl IndicatorConstraint {
    pub fn is_active(&self, values: &[f64]) -> bool {
        self.guards.iter().all(|g| g.holds(values))
    }

    pub fn implied_violation(&self, values: &[f64]) -> f64 {
        Constraint {
            name: String::new(),
            terms: self.terms.clone(),
            sense: self.sense,
            rhs: self.rhs,
            tag: self.tag,
        }
        .violation(values)
    }
}

/// Record of `product = left * right` over binaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryProduct {
    pub left: VarId,
    pub right: VarId,
    pub product: VarId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Self {
            sense: ObjectiveSense::Minimize,
            terms: Vec::new(),
            constant: 0.0,
        }
    }
}

impl Objective {
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }

    /// Dense coefficient vector in minimization form (maximize is negated).
    pub fn min_form_coefficients(&self, num_vars: usize) -> Vec<f64> {
        let sign = match self.sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let mut c = vec![0.0; num_vars];
        for &(v, coef) in &self.terms {
            c[v.0] += sign * coef;
        }
        c
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Indicators not yet turned into rows.
    pub indicators: Vec<IndicatorConstraint>,
    /// Indicators already reformulated; kept for post-solve verification.
    pub reformulated: Vec<IndicatorConstraint>,
    /// Linearized products; kept for post-solve verification.
    pub products: Vec<BinaryProduct>,
    pub objective: Objective,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
        });
        id
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_binary())
            .map(|(i, _)| VarId(i))
    }

    /// Adds `expr (sense) rhs`. Any constant carried by `expr` is moved to
    /// the right-hand side; duplicate terms are merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: &LinExpr,
        sense: Sense,
        rhs: f64,
        tag: RowTag,
    ) -> usize {
        let e = expr.compact();
        let idx = self.constraints.len();
        self.constraints.push(Constraint {
            name: name.into(),
            terms: e.terms,
            sense,
            rhs: rhs - e.constant,
            tag,
        });
        idx
    }

    pub fn add_indicator(
        &mut self,
        name: impl Into<String>,
        guards: Vec<Guard>,
        expr: &LinExpr,
        sense: Sense,
        rhs: f64,
        tag: RowTag,
    ) -> usize {
        let e = expr.compact();
        let idx = self.indicators.len();
        self.indicators.push(IndicatorConstraint {
            name: name.into(),
            guards,
            terms: e.terms,
            sense,
            rhs: rhs - e.constant,
            tag,
        });
        idx
    }

    pub fn set_objective(&mut self, sense: ObjectiveSense, expr: &LinExpr) {
        let e = expr.compact();
        self.objective = Objective {
            sense,
            terms: e.terms,
            constant: e.constant,
        };
    }

    /// Checks the structural invariants: references in range, binaries on
    /// `[0,1]`, finite coefficients, consistent bounds.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.variables.len();
        for (i, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(ModelError::InvalidBounds {
                    var: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.is_binary() && !(v.lower >= 0.0 && v.upper <= 1.0) {
                return Err(ModelError::InvalidBounds {
                    var: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            let _ = i;
        }
        let check_terms = |row: &str, terms: &[(VarId, f64)]| -> Result<(), ModelError> {
            for &(var, c) in terms {
                if var.0 >= n {
                    return Err(ModelError::UnknownVariable {
                        row: row.to_string(),
                        var: var.0,
                    });
                }
                if !c.is_finite() {
                    return Err(ModelError::NonFinite {
                        row: row.to_string(),
                    });
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            check_terms(&c.name, &c.terms)?;
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFinite {
                    row: c.name.clone(),
                });
            }
        }
        for ind in self.indicators.iter().chain(&self.reformulated) {
            check_terms(&ind.name, &ind.terms)?;
            for g in &ind.guards {
                if g.var.0 >= n {
                    return Err(ModelError::UnknownVariable {
                        row: ind.name.clone(),
                        var: g.var.0,
                    });
                }
                if !self.variables[g.var.0].is_binary() {
                    return Err(ModelError::NonBinaryGuard {
                        row: ind.name.clone(),
                        var: self.variables[g.var.0].name.clone(),
                    });
                }
            }
        }
        check_terms("objective", &self.objective.terms)?;
        if !self.objective.constant.is_finite() {
            return Err(ModelError::NonFinite {
                row: "objective".into(),
            });
        }
        Ok(())
    }

    /// Counts of rows per tag, sorted by tag.
    pub fn row_census(&self) -> Vec<(RowTag, usize)> {
        let mut counts: std::collections::BTreeMap<RowTag, usize> = Default::default();
        for c in &self.constraints {
            *counts.entry(c.tag).or_default() += 1;
        }
        counts.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_merges_duplicates_and_drops_zeros() {
        let mut e = LinExpr::new();
        e.add_term(VarId(2), 1.0)
            .add_term(VarId(0), 3.0)
            .add_term(VarId(2), -1.0)
            .add_term(VarId(0), 1.5);
        let c = e.compact();
        assert_eq!(c.terms, vec![(VarId(0), 4.5)]);
    }

    #[test]
    fn constant_moves_to_rhs() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0);
        let mut e = LinExpr::term(x, 2.0);
        e.add_constant(3.0);
        m.add_constraint("r", &e, Sense::Le, 7.0, RowTag::Model);
        assert_eq!(m.constraints[0].rhs, 4.0);
    }

    #[test]
    fn validate_rejects_unknown_var_and_bad_binary() {
        let mut m = MilpModel::new();
        m.add_continuous("x", 0.0, 1.0);
        m.add_constraint(
            "bad",
            &LinExpr::term(VarId(5), 1.0),
            Sense::Le,
            1.0,
            RowTag::Model,
        );
        assert!(matches!(
            m.validate(),
            Err(ModelError::UnknownVariable { .. })
        ));

        let mut m = MilpModel::new();
        m.add_var("b", 0.0, 2.0, VarKind::Binary);
        assert!(matches!(m.validate(), Err(ModelError::InvalidBounds { .. })));
    }

    #[test]
    fn validate_rejects_nonfinite_coefficient() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0);
        m.add_constraint(
            "nan",
            &LinExpr::term(x, f64::NAN),
            Sense::Le,
            1.0,
            RowTag::Model,
        );
        assert!(matches!(m.validate(), Err(ModelError::NonFinite { .. })));
    }
}
