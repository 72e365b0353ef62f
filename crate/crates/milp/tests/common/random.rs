//! Seeded random mixed-binary instances, emitted both as an oracle problem
//! and as a kernel model.

#![allow(dead_code)]

use gridplan_milp::{
    BinaryProduct, Guard, LinExpr, MilpModel, ObjectiveSense, RowTag, Sense, VarId,
};
use rand::Rng;

use super::oracle::{MixedProblem, Rel, Row};

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_bin: usize,
    pub max_cont: usize,
    pub max_rows: usize,
    pub products: usize,
    pub indicators: usize,
}

impl Shape {
    pub const KERNEL: Shape = Shape {
        max_bin: 12,
        max_cont: 10,
        max_rows: 20,
        products: 0,
        indicators: 0,
    };
}

pub struct Instance {
    pub problem: MixedProblem,
    pub maximize: bool,
}

fn small_int(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo..=hi) as f64
}

pub fn instance<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let free_bin = rng.gen_range(1..=shape.max_bin);
    let n_prod = shape.products;
    let n_bin = free_bin + n_prod;
    let n_cont = rng.gen_range(0..=shape.max_cont);
    let n = n_bin + n_cont;
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    for j in n_bin..n {
        let u = small_int(rng, 1, 10);
        upper[j] = u;
        lower[j] = if rng.gen_bool(0.3) { -u } else { 0.0 };
    }
    let products: Vec<(usize, usize, usize)> = (0..n_prod)
        .map(|k| {
            let l = rng.gen_range(0..free_bin);
            let mut r = rng.gen_range(0..free_bin);
            if free_bin > 1 {
                while r == l {
                    r = rng.gen_range(0..free_bin);
                }
            }
            (l, r, free_bin + k)
        })
        .collect();

    // witness point keeps most instances feasible
    let mut witness = vec![0.0; n];
    for j in 0..free_bin {
        witness[j] = f64::from(u8::from(rng.gen_bool(0.5)));
    }
    for &(l, r, p) in &products {
        witness[p] = witness[l] * witness[r];
    }
    for j in n_bin..n {
        witness[j] = rng.gen_range(lower[j]..=upper[j]);
    }
    let use_witness = rng.gen_bool(0.85);

    let random_row = |rng: &mut R, rel: Rel| row(rng, &witness, use_witness, rel);

    let m = rng.gen_range(1..=shape.max_rows);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let rel = match rng.gen_range(0..10) {
            0 => Rel::Eq,
            1..=3 => Rel::Ge,
            _ => Rel::Le,
        };
        rows.push(random_row(rng, rel));
    }
    let mut indicators = Vec::new();
    for _ in 0..shape.indicators {
        let k = rng.gen_range(1..=2.min(free_bin));
        let mut guards: Vec<(usize, bool)> = Vec::new();
        while guards.len() < k {
            let g = rng.gen_range(0..free_bin);
            if !guards.iter().any(|&(v, _)| v == g) {
                guards.push((g, rng.gen_bool(0.5)));
            }
        }
        let rel = if rng.gen_bool(0.7) { Rel::Le } else { Rel::Ge };
        let mut row = random_row(rng, rel);
        // implied rows act on the continuous part only
        row.coef[..n_bin].iter_mut().for_each(|a| *a = 0.0);
        if row.coef[n_bin..].iter().all(|&a| a == 0.0) && n_cont > 0 {
            row.coef[n_bin] = 1.0;
        }
        indicators.push((guards, row));
    }
    let cost: Vec<f64> = (0..n).map(|_| small_int(rng, -10, 10)).collect();
    Instance {
        problem: MixedProblem {
            n_bin,
            cost,
            lower,
            upper,
            rows,
            products,
            indicators,
        },
        maximize: rng.gen_bool(0.3),
    }
}

fn row<R: Rng>(rng: &mut R, witness: &[f64], use_witness: bool, rel: Rel) -> Row {
    let coef: Vec<f64> = witness
        .iter()
        .map(|_| {
            if rng.gen_bool(0.5) {
                small_int(rng, -9, 9)
            } else {
                0.0
            }
        })
        .collect();
    let act: f64 = coef.iter().zip(witness).map(|(a, x)| a * x).sum();
    let rhs = if !use_witness {
        small_int(rng, -10, 10)
    } else {
        match rel {
            Rel::Le => (act + rng.gen_range(0.0..5.0)).ceil(),
            Rel::Ge => (act - rng.gen_range(0.0..5.0)).floor(),
            Rel::Eq => act,
        }
    };
    Row { coef, rel, rhs }
}

fn sense(rel: Rel) -> Sense {
    match rel {
        Rel::Le => Sense::Le,
        Rel::Ge => Sense::Ge,
        Rel::Eq => Sense::Eq,
    }
}

fn expr(coef: &[f64], vars: &[VarId]) -> LinExpr {
    let mut e = LinExpr::new();
    for (j, &a) in coef.iter().enumerate() {
        if a != 0.0 {
            e.add_term(vars[j], a);
        }
    }
    e
}

/// Kernel model of `inst` with products linearized and indicators
/// reformulated. Returns the model and the expected sign of its objective
/// relative to the oracle's minimization value.
pub fn to_model(inst: &Instance) -> (MilpModel, f64) {
    let p = &inst.problem;
    let mut m = MilpModel::new();
    let vars: Vec<VarId> = (0..p.cost.len())
        .map(|j| {
            if j < p.n_bin {
                m.add_binary(format!("b{j}"))
            } else {
                m.add_continuous(format!("x{j}"), p.lower[j], p.upper[j])
            }
        })
        .collect();
    for (i, r) in p.rows.iter().enumerate() {
        m.add_constraint(
            format!("r{i}"),
            &expr(&r.coef, &vars),
            sense(r.rel),
            r.rhs,
            RowTag::Model,
        );
    }
    for (i, (guards, r)) in p.indicators.iter().enumerate() {
        m.add_indicator(
            format!("ind{i}"),
            guards.iter().map(|&(g, v)| Guard::new(vars[g], v)).collect(),
            &expr(&r.coef, &vars),
            sense(r.rel),
            r.rhs,
            RowTag::Indicator,
        );
    }
    let triples: Vec<BinaryProduct> = p
        .products
        .iter()
        .map(|&(l, r, q)| BinaryProduct {
            left: vars[l],
            right: vars[r],
            product: vars[q],
        })
        .collect();
    m.linearize_products(&triples).unwrap();
    m.reformulate_indicators().unwrap();
    let cost = expr(&p.cost, &vars);
    if inst.maximize {
        m.set_objective(ObjectiveSense::Maximize, &cost.scaled(-1.0));
        (m, -1.0)
    } else {
        m.set_objective(ObjectiveSense::Minimize, &cost);
        (m, 1.0)
    }
}
