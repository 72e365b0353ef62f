mod common;

use common::oracle::{self, DenseLp, Outcome, Rel, Row};
use common::random::{instance, to_model, Shape};
use gridplan_milp::{
    solve_lp, solve_milp, verify_solution, LinExpr, LpBackend, LpStatus, MilpModel, MilpStatus,
    ObjectiveSense, RowTag, Sense, SolverConfig, VarKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

fn check_against_enumeration(shape: Shape, seed: u64, backend: LpBackend) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = instance(&mut rng, shape);
    let expected = oracle::enumerate(&inst.problem);
    let (model, sign) = to_model(&inst);
    let cfg = SolverConfig {
        backend,
        ..Default::default()
    };
    let sol = solve_milp(&model, &cfg).unwrap();
    match expected {
        None => assert_eq!(sol.status, MilpStatus::Infeasible, "seed {seed}"),
        Some(v) => {
            assert_eq!(sol.status, MilpStatus::Optimal, "seed {seed}");
            let got = sol.objective.unwrap();
            assert!(close(got, sign * v), "seed {seed}: got {got}, oracle {}", sign * v);
            let rep = verify_solution(&model, &sol.values, 1e-6);
            assert!(rep.is_feasible(), "seed {seed}: {}", rep.summary());
        }
    }
}

#[test]
fn random_milps_match_enumeration_dense() {
    for seed in 0..100 {
        check_against_enumeration(Shape::KERNEL, seed, LpBackend::Dense);
    }
}

#[test]
fn random_milps_match_enumeration_sparse() {
    for seed in 0..100 {
        check_against_enumeration(Shape::KERNEL, seed, LpBackend::Sparse);
    }
}

#[test]
fn linearized_products_match_nonlinear_enumeration() {
    let shape = Shape {
        max_bin: 6,
        max_cont: 4,
        max_rows: 8,
        products: 2,
        indicators: 0,
    };
    for seed in 1000..1050 {
        check_against_enumeration(shape, seed, LpBackend::Dense);
    }
}

#[test]
fn reformulated_indicators_match_enumeration() {
    let shape = Shape {
        max_bin: 6,
        max_cont: 6,
        max_rows: 8,
        products: 0,
        indicators: 4,
    };
    for seed in 2000..2060 {
        check_against_enumeration(shape, seed, LpBackend::Dense);
        check_against_enumeration(shape, seed, LpBackend::Sparse);
    }
}

fn random_lp(seed: u64) -> (MilpModel, DenseLp) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape {
        max_bin: 1,
        max_cont: 10,
        max_rows: 20,
        products: 0,
        indicators: 0,
    };
    let inst = instance(&mut rng, shape);
    // relax the lone binary so the LP is purely continuous
    let (mut model, _) = to_model(&inst);
    model.variables[0].kind = VarKind::Continuous;
    let p = &inst.problem;
    let lp = DenseLp {
        cost: p.cost.clone(),
        lower: p.lower.clone(),
        upper: p.upper.clone(),
        rows: p.rows.clone(),
    };
    (model, lp)
}

#[test]
fn dense_simplex_matches_textbook_oracle() {
    let mut optimal = 0;
    for seed in 0..300 {
        let (model, lp) = random_lp(seed);
        let sign = if model.objective.sense == ObjectiveSense::Maximize {
            -1.0
        } else {
            1.0
        };
        let got = solve_lp(&model).unwrap();
        match oracle::lp(&lp) {
            Outcome::Optimal(v, _) => {
                optimal += 1;
                assert_eq!(got.status, LpStatus::Optimal, "seed {seed}");
                assert!(close(got.objective, sign * v), "seed {seed}");
            }
            Outcome::Infeasible => assert_eq!(got.status, LpStatus::Infeasible, "seed {seed}"),
            Outcome::Unbounded => unreachable!("boxes are finite"),
        }
    }
    assert!(optimal > 150);
}

#[test]
fn unbounded_lp_is_reported() {
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY);
    let y = m.add_continuous("y", 0.0, 3.0);
    let mut e = LinExpr::term(x, 1.0);
    e.add_term(y, -1.0);
    m.add_constraint("r", &e, Sense::Ge, 0.0, RowTag::Model);
    m.set_objective(ObjectiveSense::Maximize, &LinExpr::term(x, 1.0));
    assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    let s = solve_milp(&m, &SolverConfig::default()).unwrap();
    assert_eq!(s.status, MilpStatus::Unbounded);
}

#[test]
fn knapsack_enumerated_by_hand() {
    let mut m = MilpModel::new();
    let a = m.add_binary("a");
    let b = m.add_binary("b");
    let c = m.add_binary("c");
    let mut w = LinExpr::term(a, 5.0);
    w.add_term(b, 4.0).add_term(c, 3.0);
    m.add_constraint("w", &w, Sense::Le, 8.0, RowTag::Model);
    let mut obj = LinExpr::term(a, 10.0);
    obj.add_term(b, 6.0).add_term(c, 4.0);
    m.set_objective(ObjectiveSense::Maximize, &obj);
    // all eight cases
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for mask in 0..8u8 {
        let x = [(mask & 1) as f64, ((mask >> 1) & 1) as f64, ((mask >> 2) & 1) as f64];
        if 5.0 * x[0] + 4.0 * x[1] + 3.0 * x[2] <= 8.0 {
            let v = 10.0 * x[0] + 6.0 * x[1] + 4.0 * x[2];
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    let s = solve_milp(&m, &SolverConfig::default()).unwrap();
    assert_eq!(s.objective, Some(best.0));
    assert_eq!(s.values, best.1.to_vec());
    assert_eq!(best.1, [1.0, 0.0, 1.0]);
}

#[test]
fn product_forcing() {
    // k = 1, gamma = 1 forces mu = 1; k = 0 forces mu = 0
    for (k_val, g_val, expected) in [(1.0, 1.0, 1.0), (0.0, 1.0, 0.0)] {
        for sense in [ObjectiveSense::Minimize, ObjectiveSense::Maximize] {
            let mut m = MilpModel::new();
            let k = m.add_binary("k");
            let g = m.add_binary("g");
            let mu = m.add_binary("mu");
            m.add_constraint("fk", &LinExpr::term(k, 1.0), Sense::Eq, k_val, RowTag::Model);
            m.add_constraint("fg", &LinExpr::term(g, 1.0), Sense::Eq, g_val, RowTag::Model);
            m.linearize_products(&[gridplan_milp::BinaryProduct {
                left: k,
                right: g,
                product: mu,
            }])
            .unwrap();
            m.set_objective(sense, &LinExpr::term(mu, 1.0));
            let s = solve_milp(&m, &SolverConfig::default()).unwrap();
            assert_eq!(s.values[mu.0], expected);
        }
    }
}

#[test]
fn oracle_sanity_on_infeasible_pair() {
    let lp = DenseLp {
        cost: vec![1.0],
        lower: vec![0.0],
        upper: vec![10.0],
        rows: vec![
            Row {
                coef: vec![1.0],
                rel: Rel::Ge,
                rhs: 2.0,
            },
            Row {
                coef: vec![1.0],
                rel: Rel::Le,
                rhs: 1.0,
            },
        ],
    };
    assert_eq!(oracle::lp(&lp), Outcome::Infeasible);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn incumbent_is_feasible_and_bracketed(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = Shape { max_bin: 8, max_cont: 6, max_rows: 10, products: 1, indicators: 2 };
        let inst = instance(&mut rng, shape);
        let (model, _) = to_model(&inst);
        let sol = solve_milp(&model, &SolverConfig::default()).unwrap();
        if let Some(obj) = sol.objective {
            let rep = verify_solution(&model, &sol.values, 1e-6);
            prop_assert!(rep.is_feasible(), "{}", rep.summary());
            prop_assert!(close(model.objective.eval(&sol.values), obj));
            for v in model.binaries() {
                let x = sol.values[v.0];
                prop_assert!(x == 0.0 || x == 1.0);
            }
            let lp = solve_lp(&model).unwrap();
            // relaxation bounds the integer optimum
            match model.objective.sense {
                ObjectiveSense::Minimize => prop_assert!(lp.objective <= obj + 1e-6),
                ObjectiveSense::Maximize => prop_assert!(lp.objective >= obj - 1e-6),
            }
        }
    }

    #[test]
    fn solves_are_deterministic(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(&mut rng, Shape { max_bin: 8, max_cont: 5, max_rows: 10, products: 1, indicators: 1 });
        let (model, _) = to_model(&inst);
        for backend in [LpBackend::Dense, LpBackend::Sparse] {
            let cfg = SolverConfig { backend, ..Default::default() };
            let a = solve_milp(&model, &cfg).unwrap();
            let b = solve_milp(&model, &cfg).unwrap();
            prop_assert_eq!(&a.values, &b.values);
            prop_assert_eq!(a.objective, b.objective);
            prop_assert_eq!(a.stats.nodes, b.stats.nodes);
        }
    }

    #[test]
    fn big_m_rows_are_exact_for_random_indicator(
        lo in -20i32..0, width in 1i32..40, rhs in -25i32..25, coef in prop::sample::select(vec![-3.0, -1.0, 1.0, 2.5])
    ) {
        // guard on: coef * p <= rhs must hold; guard off: any p in the box
        let mut m = MilpModel::new();
        let p = m.add_continuous("p", lo as f64, (lo + width) as f64);
        let g = m.add_binary("g");
        m.add_indicator("i", vec![gridplan_milp::Guard::new(g, true)], &LinExpr::term(p, coef), Sense::Le, rhs as f64, RowTag::Model);
        m.reformulate_indicators().unwrap();
        let mut grid = vec![lo as f64, (lo + width) as f64, rhs as f64 / coef];
        grid.push((lo as f64 + (lo + width) as f64) / 2.0);
        for &x in &grid {
            if x < lo as f64 || x > (lo + width) as f64 { continue; }
            for gv in [0.0, 1.0] {
                let vals = [x, gv];
                let rows_ok = m.constraints.iter().all(|c| c.violation(&vals) <= 1e-9);
                let semantic_ok = gv == 0.0 || coef * x <= rhs as f64 + 1e-9;
                prop_assert_eq!(rows_ok, semantic_ok, "x={} g={}", x, gv);
            }
        }
    }
}

#[test]
fn sparse_and_dense_relaxations_agree_on_random_fixings() {
    use gridplan_milp::{DenseRelaxation, LpProblem, NodeRelaxation, RelaxationSolver, SparseRelaxation};
    use rand::Rng;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(&mut rng, Shape::KERNEL);
        let (model, _) = to_model(&inst);
        let lp = LpProblem::relaxation_of(&model).unwrap();
        let bins: Vec<usize> = model.binaries().map(|v| v.0).collect();
        let mut sparse = SparseRelaxation::new(&lp);
        let mut dense = DenseRelaxation::new(lp.clone());
        for _ in 0..20 {
            let k = rng.gen_range(0..=bins.len());
            let fix: Vec<(usize, f64)> = bins[..k]
                .iter()
                .map(|&b| (b, rng.gen_range(0..2) as f64))
                .collect();
            match (sparse.solve(&fix, None).unwrap(), dense.solve(&fix, None).unwrap()) {
                (NodeRelaxation::Optimal { objective: a, .. }, NodeRelaxation::Optimal { objective: b, .. }) => {
                    assert!(close(a, b), "seed {seed} {fix:?}: {a} vs {b}")
                }
                (NodeRelaxation::Infeasible, NodeRelaxation::Infeasible) => {}
                (a, b) => panic!("seed {seed} {fix:?}: {a:?} vs {b:?}"),
            }
        }
    }
}
