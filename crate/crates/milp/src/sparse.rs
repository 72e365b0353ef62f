//! Sparse LP backend for large relaxations, built on `microlp`.
//!
//! Node relaxations are re-solved from a cached ancestor by fixing the
//! remaining branching variables one at a time (dual simplex warm start).
//! An infeasible verdict from the warm path is confirmed by a cold solve
//! with the fixings written into the bounds: the warm path of `microlp`
//! 0.6.0 occasionally reports infeasibility for feasible nodes.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOptions, SolveOutcome, Variable};

use crate::bnb::{NodeRelaxation, RelaxationSolver};
use crate::error::SolveError;
use crate::model::Sense;
use crate::simplex::LpProblem;

type Path = Vec<(usize, u8)>;

pub struct SparseRelaxation {
    lp: LpProblem,
    problem: Problem,
    vars: Vec<Variable>,
    cost_offset: f64,
    root: Option<microlp::Solution>,
    cache: HashMap<Path, microlp::Solution>,
    order: VecDeque<Path>,
    capacity: usize,
    iterations: u64,
}

impl SparseRelaxation {
    pub fn new(lp: &LpProblem) -> Self {
        let (problem, vars) = build(lp, &[]);
        Self {
            lp: lp.clone(),
            problem,
            vars,
            cost_offset: lp.cost_offset,
            root: None,
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity: 48,
            iterations: 0,
        }
    }

    fn remember(&mut self, path: Path, sol: microlp::Solution) {
        if self.cache.contains_key(&path) {
            return;
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.cache.remove(&old);
            }
        }
        self.order.push_back(path.clone());
        self.cache.insert(path, sol);
    }

    fn relaxation(&self, sol: &microlp::Solution) -> NodeRelaxation {
        let values = self
            .vars
            .iter()
            .map(|&v| sol.var_value_raw(v))
            .collect();
        NodeRelaxation::Optimal {
            objective: sol.objective() + self.cost_offset,
            values,
        }
    }
}

fn build(lp: &LpProblem, fixings: &[(usize, f64)]) -> (Problem, Vec<Variable>) {
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for &(j, v) in fixings {
        lower[j] = v;
        upper[j] = v;
    }
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = (0..lp.num_cols())
        .map(|j| problem.add_var(lp.cost[j], (lower[j], upper[j])))
        .collect();
    for row in &lp.rows {
        let op = match row.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        let expr: Vec<(Variable, f64)> = row.terms.iter().map(|&(j, a)| (vars[j], a)).collect();
        problem.add_constraint(expr, op, row.rhs);
    }
    (problem, vars)
}

fn time_left(deadline: Option<Instant>) -> SolveOptions {
    let mut options = SolveOptions::default();
    options.time_limit = deadline.map(|d| {
        d.saturating_duration_since(Instant::now())
            .max(Duration::from_micros(1))
    });
    options
}

fn map_err(e: microlp::Error) -> Result<NodeRelaxation, SolveError> {
    match e {
        microlp::Error::Infeasible => Ok(NodeRelaxation::Infeasible),
        microlp::Error::Unbounded => Ok(NodeRelaxation::Unbounded),
        other => Err(SolveError::Numerical(other.to_string())),
    }
}

impl RelaxationSolver for SparseRelaxation {
    fn solve(
        &mut self,
        fixings: &[(usize, f64)],
        deadline: Option<Instant>,
    ) -> Result<NodeRelaxation, SolveError> {
        if self.root.is_none() {
            match self.problem.solve_with(time_left(deadline)) {
                Ok(SolveOutcome::Solution(sol)) => {
                    self.iterations = sol.stats().lp_iterations;
                    self.root = Some(sol);
                }
                Ok(SolveOutcome::Interrupted(_)) => return Ok(NodeRelaxation::TimedOut),
                Err(e) => return map_err(e),
            }
        }
        let path: Path = fixings.iter().map(|&(j, v)| (j, v.round() as u8)).collect();
        // longest cached prefix
        let mut start = 0;
        for k in (1..=path.len()).rev() {
            if self.cache.contains_key(&path[..k]) {
                start = k;
                break;
            }
        }
        let mut sol = if start == 0 {
            self.root.clone().expect("root solved")
        } else {
            self.cache[&path[..start]].clone()
        };
        if start == path.len() {
            return Ok(self.relaxation(&sol));
        }
        for k in start..path.len() {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Ok(NodeRelaxation::TimedOut);
                }
            }
            let (j, v) = fixings[k];
            let before = sol.stats().lp_iterations;
            match sol.fix_var(self.vars[j], v) {
                Ok(SolveOutcome::Solution(next)) => {
                    self.iterations += next.stats().lp_iterations.saturating_sub(before);
                    sol = next;
                }
                Ok(SolveOutcome::Interrupted(_)) => return Ok(NodeRelaxation::TimedOut),
                Err(microlp::Error::Infeasible) => return self.cold(fixings, deadline),
                Err(e) => return map_err(e),
            }
        }
        let out = self.relaxation(&sol);
        self.remember(path, sol);
        Ok(out)
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }
}

impl SparseRelaxation {
    fn cold(
        &mut self,
        fixings: &[(usize, f64)],
        deadline: Option<Instant>,
    ) -> Result<NodeRelaxation, SolveError> {
        let (problem, _) = build(&self.lp, fixings);
        match problem.solve_with(time_left(deadline)) {
            Ok(SolveOutcome::Solution(sol)) => {
                self.iterations += sol.stats().lp_iterations;
                // not cached: its bounds differ from the root problem's
                Ok(self.relaxation(&sol))
            }
            Ok(SolveOutcome::Interrupted(_)) => Ok(NodeRelaxation::TimedOut),
            Err(e) => map_err(e),
        }
    }
}
