//! Best-first branch-and-bound over binary variables.
//!
//! The node with the smallest relaxation bound is expanded first (ties by
//! creation order). Branching picks the most fractional binary, ties by
//! lowest variable index. Each integral relaxation is polished by re-solving
//! with every binary fixed to its rounded value and then checked by the
//! verifier before it can become the incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{ModelError, SolveError};
use crate::model::{MilpModel, ObjectiveSense};
use crate::simplex::{DenseSimplex, LpProblem, LpStatus};
use crate::sparse::SparseRelaxation;
use crate::verify::verify_solution;

/// Result of one node relaxation, objective in minimization form.
#[derive(Debug, Clone)]
pub enum NodeRelaxation {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
    TimedOut,
}

/// Solves LP relaxations with a set of binaries fixed.
///
/// `fixings` is the branching path from the root; implementations may use it
/// as a warm-start key. Implementations must be deterministic.
pub trait RelaxationSolver {
    fn solve(
        &mut self,
        fixings: &[(usize, f64)],
        deadline: Option<Instant>,
    ) -> Result<NodeRelaxation, SolveError>;

    fn iterations(&self) -> u64;
}

/// Re-solves every node from scratch with the dense simplex.
pub struct DenseRelaxation {
    lp: LpProblem,
    simplex: DenseSimplex,
    iterations: u64,
}

impl DenseRelaxation {
    pub fn new(lp: LpProblem) -> Self {
        Self {
            lp,
            simplex: DenseSimplex::default(),
            iterations: 0,
        }
    }
}

impl RelaxationSolver for DenseRelaxation {
    fn solve(
        &mut self,
        fixings: &[(usize, f64)],
        deadline: Option<Instant>,
    ) -> Result<NodeRelaxation, SolveError> {
        let mut lp = self.lp.clone();
        for &(j, v) in fixings {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let sol = self.simplex.solve(&lp, deadline)?;
        self.iterations += sol.iterations as u64;
        Ok(match sol.status {
            LpStatus::Optimal => {
                let min_form = lp.cost.iter().zip(&sol.values).map(|(c, v)| c * v).sum::<f64>()
                    + lp.cost_offset;
                NodeRelaxation::Optimal {
                    objective: min_form,
                    values: sol.values,
                }
            }
            LpStatus::Infeasible => NodeRelaxation::Infeasible,
            LpStatus::Unbounded => NodeRelaxation::Unbounded,
            LpStatus::IterationLimit => NodeRelaxation::TimedOut,
        })
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpBackend {
    /// Dense for small models, sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub node_limit: Option<usize>,
    /// Relative optimality gap, `(incumbent - bound) / max(1, |incumbent|)`.
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub int_tol: f64,
    /// Tolerance used by the verifier on every accepted incumbent.
    pub feas_tol: f64,
    pub backend: LpBackend,
    /// Try rounding the node relaxation every this many nodes (0 = root only).
    pub rounding_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            node_limit: None,
            gap_tol: 1e-6,
            time_limit: None,
            int_tol: 1e-6,
            feas_tol: 1e-6,
            backend: LpBackend::Auto,
            rounding_every: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node or time limit reached; an incumbent may or may not exist.
    IterationLimit,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::Unbounded => "unbounded",
            MilpStatus::IterationLimit => "iteration-limit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: u64,
    pub incumbents: usize,
    /// Best bound in the model's objective sense.
    pub best_bound: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Objective of the incumbent in the model's sense (constant included).
    pub objective: Option<f64>,
    /// Incumbent assignment; empty when there is none. Binaries are exact.
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        self.objective.is_some()
    }
}

struct Node {
    bound: f64,
    id: u64,
    fixings: Vec<(usize, f64)>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound, then smaller id, is "greater".
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    config: &'a SolverConfig,
    relax: Box<dyn RelaxationSolver + 'a>,
    binaries: Vec<usize>,
    deadline: Option<Instant>,
    incumbent: Option<(f64, Vec<f64>)>,
    stats: SolveStats,
    negated: bool,
}

/// Solves `model` (indicators already reformulated) by branch-and-bound.
pub fn solve_milp(model: &MilpModel, config: &SolverConfig) -> Result<MilpSolution, SolveError> {
    model.validate()?;
    let lp = LpProblem::relaxation_of(model)?;
    let backend = match config.backend {
        LpBackend::Auto if lp.rows.len() <= 300 && lp.num_cols() <= 400 => LpBackend::Dense,
        LpBackend::Auto => LpBackend::Sparse,
        b => b,
    };
    let relax: Box<dyn RelaxationSolver> = match backend {
        LpBackend::Sparse => Box::new(SparseRelaxation::new(&lp)),
        _ => Box::new(DenseRelaxation::new(lp)),
    };
    solve_milp_with(model, config, relax)
}

/// Branch-and-bound with a caller-supplied relaxation solver, which must
/// solve the relaxation of `model` in minimization form.
pub fn solve_milp_with<'a>(
    model: &'a MilpModel,
    config: &'a SolverConfig,
    relax: Box<dyn RelaxationSolver + 'a>,
) -> Result<MilpSolution, SolveError> {
    let start = Instant::now();
    model.validate()?;
    if !model.indicators.is_empty() {
        return Err(ModelError::PendingIndicators(model.indicators.len()).into());
    }
    let mut search = Search {
        model,
        config,
        relax,
        binaries: model.binaries().map(|v| v.0).collect(),
        deadline: config.time_limit.map(|d| start + d),
        incumbent: None,
        stats: SolveStats::default(),
        negated: model.objective.sense == ObjectiveSense::Maximize,
    };
    let status = search.run()?;
    search.stats.lp_iterations = search.relax.iterations();
    search.stats.elapsed = start.elapsed();
    let sign = if search.negated { -1.0 } else { 1.0 };
    search.stats.best_bound *= sign;
    Ok(match search.incumbent {
        Some((obj, values)) => MilpSolution {
            status,
            objective: Some(sign * obj),
            values,
            stats: search.stats,
        },
        None => MilpSolution {
            status,
            objective: None,
            values: Vec::new(),
            stats: search.stats,
        },
    })
}

impl Search<'_> {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(o, _)| *o)
    }

    fn gap_closed(&self, bound: f64) -> bool {
        let inc = self.incumbent_value();
        inc.is_finite() && inc - bound <= self.config.gap_tol * inc.abs().max(1.0)
    }

    fn most_fractional(&self, values: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let v = values[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac <= self.config.int_tol {
                continue;
            }
            match best {
                Some((_, f)) if frac <= f => {}
                _ => best = Some((j, frac)),
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fixes every binary to its rounded value, re-solves the continuous
    /// part and offers the result as incumbent.
    fn try_rounded(&mut self, values: &[f64]) -> Result<bool, SolveError> {
        let fixings: Vec<(usize, f64)> = self
            .binaries
            .iter()
            .map(|&j| (j, if values[j] >= 0.5 { 1.0 } else { 0.0 }))
            .collect();
        match self.relax.solve(&fixings, self.deadline)? {
            NodeRelaxation::Optimal { objective, mut values } => {
                if objective >= self.incumbent_value() {
                    return Ok(false);
                }
                for &(j, v) in &fixings {
                    values[j] = v;
                }
                let report = verify_solution(self.model, &values, self.config.feas_tol);
                if !report.is_feasible() {
                    return Err(SolveError::Verification(report.summary()));
                }
                debug_assert!(
                    (self.objective_of(&values) - objective).abs()
                        <= 1e-6 * objective.abs().max(1.0)
                );
                self.incumbent = Some((objective, values));
                self.stats.incumbents += 1;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn objective_of(&self, values: &[f64]) -> f64 {
        let v = self.model.objective.eval(values);
        if self.model.objective.sense == ObjectiveSense::Maximize {
            -v
        } else {
            v
        }
    }

    fn run(&mut self) -> Result<MilpStatus, SolveError> {
        let root = self.relax.solve(&[], self.deadline)?;
        let (bound, values) = match root {
            NodeRelaxation::Optimal { objective, values } => (objective, values),
            NodeRelaxation::Infeasible => return Ok(MilpStatus::Infeasible),
            NodeRelaxation::Unbounded => return Ok(MilpStatus::Unbounded),
            NodeRelaxation::TimedOut => return Ok(MilpStatus::IterationLimit),
        };
        self.stats.nodes = 1;
        self.stats.best_bound = bound;
        let mut next_id = 0u64;
        let mut heap = BinaryHeap::new();
        if self.most_fractional(&values).is_none() {
            self.try_rounded(&values)?;
            if self.incumbent.is_some() {
                self.stats.best_bound = self.incumbent_value();
                return Ok(MilpStatus::Optimal);
            }
        } else {
            self.try_rounded(&values)?;
        }
        heap.push(Node {
            bound,
            id: next_id,
            fixings: Vec::new(),
            values,
        });
        next_id += 1;

        while let Some(node) = heap.pop() {
            // best-first: the popped bound is the global bound
            let global = node.bound.min(self.incumbent_value());
            self.stats.best_bound = global;
            debug_assert!(global <= self.incumbent_value() + 1e-9);
            if self.gap_closed(node.bound) {
                self.stats.best_bound = node.bound.min(self.incumbent_value());
                return Ok(MilpStatus::Optimal);
            }
            if self.timed_out()
                || self
                    .config
                    .node_limit
                    .is_some_and(|lim| self.stats.nodes >= lim)
            {
                return Ok(MilpStatus::IterationLimit);
            }
            let Some(j) = self.most_fractional(&node.values) else {
                // integral node whose polish failed; nothing to branch on
                continue;
            };
            if self.config.rounding_every > 0 && self.stats.nodes % self.config.rounding_every == 0
            {
                self.try_rounded(&node.values)?;
            }
            for val in [0.0, 1.0] {
                let mut fixings = node.fixings.clone();
                fixings.push((j, val));
                self.stats.nodes += 1;
                let (bound, values) = match self.relax.solve(&fixings, self.deadline)? {
                    NodeRelaxation::Optimal { objective, values } => (objective, values),
                    NodeRelaxation::Infeasible => continue,
                    NodeRelaxation::Unbounded => return Ok(MilpStatus::Unbounded),
                    NodeRelaxation::TimedOut => return Ok(MilpStatus::IterationLimit),
                };
                if self.gap_closed(bound) {
                    continue;
                }
                if self.most_fractional(&values).is_none() {
                    self.try_rounded(&values)?;
                    continue;
                }
                heap.push(Node {
                    bound,
                    id: next_id,
                    fixings,
                    values,
                });
                next_id += 1;
            }
        }
        if self.incumbent.is_some() {
            self.stats.best_bound = self.incumbent_value();
            Ok(MilpStatus::Optimal)
        } else {
            Ok(MilpStatus::Infeasible)
        }
    }
}
