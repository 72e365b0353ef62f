//! Independent feasibility check of a full assignment against the model.

use std::fmt;

use crate::model::MilpModel;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Bound { var: String, value: f64 },
    Integrality { var: String, value: f64 },
    Row { row: String, amount: f64 },
    Indicator { row: String, amount: f64 },
    Product { var: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound { var, value } => write!(f, "{var} = {value} outside bounds"),
            Violation::Integrality { var, value } => write!(f, "{var} = {value} not integral"),
            Violation::Row { row, amount } => write!(f, "row {row} violated by {amount:.3e}"),
            Violation::Indicator { row, amount } => {
                write!(f, "active indicator {row} violated by {amount:.3e}")
            }
            Violation::Product { var } => write!(f, "product {var} inconsistent"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub max_row_violation: f64,
}

impl VerificationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let shown: Vec<String> = self.violations.iter().take(5).map(|v| v.to_string()).collect();
        let more = self.violations.len().saturating_sub(shown.len());
        if more > 0 {
            format!("{} (+{more} more)", shown.join("; "))
        } else {
            shown.join("; ")
        }
    }
}

/// Checks bounds, integrality, every row, every reformulated indicator whose
/// guard holds and every linearized product. Row tolerance is
/// `tol * (1 + |rhs|)`.
pub fn verify_solution(model: &MilpModel, values: &[f64], tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::default();
    if values.len() != model.num_vars() {
        rep.violations.push(Violation::Row {
            row: format!("<assignment of length {}>", values.len()),
            amount: f64::INFINITY,
        });
        return rep;
    }
    for (v, &x) in model.variables.iter().zip(values) {
        if !x.is_finite() || x < v.lower - tol || x > v.upper + tol {
            rep.violations.push(Violation::Bound {
                var: v.name.clone(),
                value: x,
            });
        }
        if v.is_binary() && x != 0.0 && x != 1.0 {
            rep.violations.push(Violation::Integrality {
                var: v.name.clone(),
                value: x,
            });
        }
    }
    for c in &model.constraints {
        let amount = c.violation(values);
        rep.max_row_violation = rep.max_row_violation.max(amount);
        if amount > tol * (1.0 + c.rhs.abs()) {
            rep.violations.push(Violation::Row {
                row: c.name.clone(),
                amount,
            });
        }
    }
    for ind in model.reformulated.iter().chain(&model.indicators) {
        if ind.is_active(values) {
            let amount = ind.implied_violation(values);
            if amount > tol * (1.0 + ind.rhs.abs()) {
                rep.violations.push(Violation::Indicator {
                    row: ind.name.clone(),
                    amount,
                });
            }
        }
    }
    for p in &model.products {
        let l = values[p.left.0] >= 0.5;
        let r = values[p.right.0] >= 0.5;
        let prod = values[p.product.0] >= 0.5;
        if prod != (l && r) {
            rep.violations.push(Violation::Product {
                var: model.variables[p.product.0].name.clone(),
            });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinaryProduct, Guard, LinExpr, RowTag, Sense};

    #[test]
    fn flags_each_kind() {
        let mut m = MilpModel::new();
        let p = m.add_continuous("p", 0.0, 10.0);
        let g = m.add_binary("g");
        let k = m.add_binary("k");
        let mu = m.add_binary("mu");
        m.add_indicator(
            "cap",
            vec![Guard::new(g, true)],
            &LinExpr::term(p, 1.0),
            Sense::Le,
            4.0,
            RowTag::Model,
        );
        m.reformulate_indicators().unwrap();
        m.products.push(BinaryProduct {
            left: g,
            right: k,
            product: mu,
        });
        assert!(verify_solution(&m, &[4.0, 1.0, 1.0, 1.0], 1e-9).is_feasible());
        let rep = verify_solution(&m, &[5.0, 1.0, 0.0, 1.0], 1e-9);
        assert_eq!(rep.violations.len(), 3, "{}", rep.summary());
        let rep = verify_solution(&m, &[0.0, 0.5, 0.0, 0.0], 1e-9);
        assert!(matches!(rep.violations[0], Violation::Integrality { .. }));
    }
}
