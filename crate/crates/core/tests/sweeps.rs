mod common;

use common::toy3_heat;
use gridplan::expansion::{solve_scenario, Action, ModelOptions};
use gridplan::milp::SolverConfig;
use gridplan::sweep::{
    diff_plans, render_decision_table, run_sweep, summary_csv, Axis, Combine, SweepSpec,
};
use gridplan::SweepError;

fn cop_spec(values: Vec<f64>) -> SweepSpec {
    SweepSpec::single("cop", "toy3", "heat_pump.cop", values)
}

#[test]
fn worker_count_does_not_change_output() {
    let base = toy3_heat(3.0);
    let spec = cop_spec(vec![5.0, 4.0, 3.0, 2.0, 1.5]);
    let cfg = SolverConfig::default();
    let one = run_sweep(&spec, &base, &cfg, 1).unwrap();
    let four = run_sweep(&spec, &base, &cfg, 4).unwrap();
    assert_eq!(summary_csv(&one), summary_csv(&four));
    assert_eq!(render_decision_table(&one), render_decision_table(&four));
    assert_eq!(one, four);
    assert_eq!(summary_csv(&one).lines().count(), 6);
}

#[test]
fn single_point_equals_direct_solve() {
    let base = toy3_heat(2.5);
    let cfg = SolverConfig::default();
    let r = run_sweep(&cop_spec(vec![2.5]), &base, &cfg, 1).unwrap();
    let direct = solve_scenario(&base, ModelOptions::default(), &cfg).unwrap().plan.unwrap();
    let swept = r.points[0].plan.clone().unwrap();
    assert_eq!(swept.decisions, direct.decisions);
    assert_eq!(swept.total_cost, direct.total_cost);
}

#[test]
fn shuffled_values_give_same_plans() {
    let base = toy3_heat(3.0);
    let cfg = SolverConfig::default();
    let a = run_sweep(&cop_spec(vec![1.5, 3.0, 5.0]), &base, &cfg, 2).unwrap();
    let b = run_sweep(&cop_spec(vec![5.0, 1.5, 3.0]), &base, &cfg, 2).unwrap();
    for p in &a.points {
        let q = b.points.iter().find(|q| q.values == p.values).unwrap();
        assert_eq!(p.plan.as_ref().unwrap().decisions, q.plan.as_ref().unwrap().decisions);
        assert_eq!(p.plan.as_ref().unwrap().total_cost, q.plan.as_ref().unwrap().total_cost);
    }
}

#[test]
fn cop_sweep_costs_non_increasing() {
    let base = toy3_heat(3.0);
    let r = run_sweep(
        &cop_spec(vec![1.5, 2.0, 2.5, 3.0, 4.0, 5.0]),
        &base,
        &SolverConfig::default(),
        3,
    )
    .unwrap();
    let totals: Vec<f64> = r.total_series().into_iter().map(Option::unwrap).collect();
    for w in totals.windows(2) {
        assert!(w[1] <= w[0] + 1e-6 * w[0], "{totals:?}");
    }
}

#[test]
fn unknown_path_rejected_before_solving() {
    let base = toy3_heat(3.0);
    let spec = SweepSpec::single("bad", "toy3", "node.42.risk", vec![0.5]);
    assert!(matches!(
        run_sweep(&spec, &base, &SolverConfig::default(), 1),
        Err(SweepError::UnknownPath(_))
    ));
    let spec = SweepSpec::single("bad", "toy3", "node.3.colour", vec![0.5]);
    assert!(matches!(
        run_sweep(&spec, &base, &SolverConfig::default(), 1),
        Err(SweepError::UnknownPath(_))
    ));
    let spec = cop_spec(vec![]);
    assert!(matches!(
        run_sweep(&spec, &base, &SolverConfig::default(), 1),
        Err(SweepError::EmptyValues)
    ));
}

#[test]
fn failing_point_is_recorded() {
    let base = toy3_heat(3.0);
    // growth of 3 per year overloads the 200 MW generator
    let spec = SweepSpec::single("growth", "toy3", "demand.3.growth", vec![0.0, 3.0]);
    let r = run_sweep(&spec, &base, &SolverConfig::default(), 2).unwrap();
    assert!(r.points[0].is_optimal());
    assert_eq!(r.points[1].status, "infeasible");
    assert!(!r.all_optimal());
    let csv = summary_csv(&r);
    assert!(csv.lines().nth(2).unwrap().starts_with("3.000000,infeasible,,"));
}

#[test]
fn two_axis_zip_ratio_grid() {
    let base = toy3_heat(3.0);
    let mut spec = cop_spec(vec![2.0, 4.0]);
    spec.axes.push(Axis {
        path: "heat_pump.unit_cost".into(),
        values: vec![200.0, 400.0],
    });
    spec.combine = Combine::Zip;
    let r = run_sweep(&spec, &base, &SolverConfig::default(), 2).unwrap();
    assert_eq!(r.points.len(), 2);
    let header = summary_csv(&r).lines().next().unwrap().to_string();
    assert!(header.starts_with("heat_pump.cop,heat_pump.unit_cost,status,ic,oc,total"));
}

#[test]
fn hp_toggle_diff() {
    let base = toy3_heat(3.0);
    let cfg = SolverConfig::default();
    let mut off = cop_spec(vec![3.0]);
    off.toggles.heat_pump = Some(false);
    let a = run_sweep(&off, &base, &cfg, 1).unwrap().points[0].plan.clone().unwrap();
    let b = run_sweep(&cop_spec(vec![3.0]), &base, &cfg, 1).unwrap().points[0]
        .plan
        .clone()
        .unwrap();
    let delta = diff_plans(&a, &b).unwrap();
    assert!(delta.added.iter().any(|d| d.action == Action::HpBuild));
    assert!((delta.total_delta - delta.objective_delta).abs() <= 1e-6 * a.total_cost);
    assert!(delta.total_delta < 0.0);
}
