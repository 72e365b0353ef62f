//! Writer for the CPLEX LP text format, for inspecting models in other tools.

use std::fmt::Write as _;

use crate::model::{MilpModel, ObjectiveSense, Sense, VarKind};

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.[]()".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        s.insert(0, '_');
    }
    s
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
        return;
    }
    for &(j, c) in terms {
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", c.abs(), names[j]);
    }
}

/// Renders `model` in LP format. Pending indicators are written with the
/// `->` syntax (single-guard only; conjunctions are omitted with a comment).
pub fn write_lp(model: &MilpModel) -> String {
    let names: Vec<String> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{}#{i}", sanitize(&v.name)).replace('#', "_"))
        .collect();
    let mut out = String::new();
    out.push_str(match model.objective.sense {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj: Vec<(usize, f64)> = model.objective.terms.iter().map(|&(v, c)| (v.0, c)).collect();
    if names.is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, &obj, &names);
    }
    if model.objective.constant != 0.0 {
        let _ = write!(out, " + {}", model.objective.constant);
    }
    out.push_str("\nSubject To\n");
    let op = |s: Sense| match s {
        Sense::Le => "<=",
        Sense::Ge => ">=",
        Sense::Eq => "=",
    };
    for (i, c) in model.constraints.iter().enumerate() {
        let _ = write!(out, " {}_{i}:", sanitize(&c.name));
        let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.0, a)).collect();
        write_terms(&mut out, &terms, &names);
        let _ = writeln!(out, " {} {}", op(c.sense), c.rhs);
    }
    for (i, ind) in model.indicators.iter().enumerate() {
        if ind.guards.len() != 1 {
            let _ = writeln!(out, "\\ indicator {} has a conjunctive guard", ind.name);
            continue;
        }
        let g = ind.guards[0];
        let _ = write!(
            out,
            " ind_{}_{i}: {} = {} ->",
            sanitize(&ind.name),
            names[g.var.0],
            u8::from(g.value)
        );
        let terms: Vec<(usize, f64)> = ind.terms.iter().map(|&(v, a)| (v.0, a)).collect();
        write_terms(&mut out, &terms, &names);
        let _ = writeln!(out, " {} {}", op(ind.sense), ind.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.is_binary() {
            continue;
        }
        let lo = if v.lower.is_finite() {
            v.lower.to_string()
        } else {
            "-inf".into()
        };
        let hi = if v.upper.is_finite() {
            v.upper.to_string()
        } else {
            "+inf".into()
        };
        let _ = writeln!(out, " {lo} <= {name} <= {hi}");
    }
    let bins: Vec<&String> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(8) {
            let line: Vec<&str> = chunk.iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, " {}", line.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, RowTag};

    #[test]
    fn sections_present() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("flow[1-4,a1]", -5.0, 5.0);
        let y = m.add_binary("build 2-6");
        let mut e = LinExpr::term(x, 1.0);
        e.add_term(y, -5.0);
        m.add_constraint("cap", &e, Sense::Le, 0.0, RowTag::Model);
        m.set_objective(ObjectiveSense::Minimize, &LinExpr::term(y, 3.0));
        let s = write_lp(&m);
        assert!(s.starts_with("Minimize\n obj: + 3 build_2_6_1"));
        assert!(s.contains(" cap_0: + 1 flow[1_4_a1]_0 - 5 build_2_6_1 <= 0"));
        assert!(s.contains(" -5 <= flow[1_4_a1]_0 <= 5"));
        assert!(s.contains("Binaries\n build_2_6_1\n"));
        assert!(s.ends_with("End\n"));
    }
}
