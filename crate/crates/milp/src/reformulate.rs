//! Reformulation passes: binary product linearization and indicator to
//! big-M rows with the constant derived from variable bounds.

use crate::error::ModelError;
use crate::model::{BinaryProduct, IndicatorConstraint, LinExpr, MilpModel, RowTag, Sense, VarId};

/// Summary of one `reformulate_indicators` pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReformulationReport {
    /// Rows emitted.
    pub emitted: usize,
    /// Indicators whose implied row already holds under the bounds.
    pub dropped: usize,
    /// Largest big-M constant used.
    pub max_big_m: f64,
}

impl MilpModel {
    /// Adds `p <= a`, `p <= b`, `p >= a + b - 1` for every product triple.
    ///
    /// Triples already linearized are skipped, so the pass is idempotent.
    pub fn linearize_products(&mut self, products: &[BinaryProduct]) -> Result<usize, ModelError> {
        for p in products {
            for v in [p.left, p.right, p.product] {
                if v.0 >= self.variables.len() {
                    return Err(ModelError::UnknownVariable {
                        row: "product".into(),
                        var: v.0,
                    });
                }
                if !self.variables[v.0].is_binary() {
                    return Err(ModelError::NonBinaryOperand {
                        var: self.variables[v.0].name.clone(),
                    });
                }
            }
        }
        let mut added = 0;
        for p in products {
            if self.products.contains(p) {
                continue;
            }
            let name = self.variables[p.product.0].name.clone();
            let mut upper_left = LinExpr::term(p.product, 1.0);
            upper_left.add_term(p.left, -1.0);
            self.add_constraint(
                format!("{name}_le_left"),
                &upper_left,
                Sense::Le,
                0.0,
                RowTag::Linearization,
            );
            let mut upper_right = LinExpr::term(p.product, 1.0);
            upper_right.add_term(p.right, -1.0);
            self.add_constraint(
                format!("{name}_le_right"),
                &upper_right,
                Sense::Le,
                0.0,
                RowTag::Linearization,
            );
            let mut lower = LinExpr::term(p.product, 1.0);
            lower.add_term(p.left, -1.0).add_term(p.right, -1.0);
            self.add_constraint(
                format!("{name}_ge_sum"),
                &lower,
                Sense::Ge,
                -1.0,
                RowTag::Linearization,
            );
            self.products.push(*p);
            added += 1;
        }
        Ok(added)
    }

    /// Replaces every pending indicator by a big-M row whose constant is the
    /// bound-derived slack `sup(lhs) - rhs`, clamped at zero. Indicators that
    /// already hold under the bounds are dropped.
    pub fn reformulate_indicators(&mut self) -> Result<ReformulationReport, ModelError> {
        // compute every constant first so a failure leaves the model untouched
        let mut rows = Vec::new();
        for (i, ind) in self.indicators.iter().enumerate() {
            for (terms, rhs) in le_forms(ind) {
                let m = self.big_m(&ind.name, &terms, rhs)?;
                rows.push((i, terms, rhs, m));
            }
        }
        let pending = std::mem::take(&mut self.indicators);
        let mut report = ReformulationReport::default();
        for (k, (i, terms, rhs, m)) in rows.into_iter().enumerate() {
            let ind = &pending[i];
            if m <= 0.0 {
                report.dropped += 1;
                continue;
            }
            report.max_big_m = report.max_big_m.max(m);
            let mut expr = LinExpr {
                terms,
                constant: 0.0,
            };
            let mut rhs = rhs;
            for g in &ind.guards {
                if g.value {
                    // violated when var = 0: + M (1 - var)
                    expr.add_term(g.var, m);
                    rhs += m;
                } else {
                    // violated when var = 1: + M var
                    expr.add_term(g.var, -m);
                }
            }
            self.add_constraint(
                format!("{}_bigm{}", ind.name, k),
                &expr,
                Sense::Le,
                rhs,
                ind.tag,
            );
            report.emitted += 1;
        }
        self.reformulated.extend(pending);
        Ok(report)
    }

    /// Upper bound of `terms` over the variable box, minus `rhs`.
    fn big_m(&self, row: &str, terms: &[(VarId, f64)], rhs: f64) -> Result<f64, ModelError> {
        let mut sup = 0.0;
        for &(v, c) in terms {
            let var = &self.variables[v.0];
            let bound = if c > 0.0 { var.upper } else { var.lower };
            if !bound.is_finite() {
                return Err(ModelError::UnboundedIndicator {
                    row: row.to_string(),
                    var: var.name.clone(),
                });
            }
            sup += c * bound;
        }
        Ok((sup - rhs).max(0.0))
    }
}

/// Implied row as one or two `<=` forms.
fn le_forms(ind: &IndicatorConstraint) -> Vec<(Vec<(VarId, f64)>, f64)> {
    let neg = || ind.terms.iter().map(|&(v, c)| (v, -c)).collect::<Vec<_>>();
    match ind.sense {
        Sense::Le => vec![(ind.terms.clone(), ind.rhs)],
        Sense::Ge => vec![(neg(), -ind.rhs)],
        Sense::Eq => vec![(ind.terms.clone(), ind.rhs), (neg(), -ind.rhs)],
    }
}
