//! Bounded-variable primal simplex with an explicit dense basis inverse.
//!
//! Rows are written as `A x - s = 0` with one slack per row whose bounds
//! carry the row sense, so every variable (structural or slack) is simply a
//! bounded column. Phase 1 uses one artificial per row that starts outside
//! its slack bounds. The basis inverse is updated by elementary pivots and
//! recomputed from scratch every [`SimplexOptions::refactor_every`] pivots.
//!
//! Pricing is Dantzig (largest reduced cost) with ties broken by lowest
//! index; the ratio test breaks ties the same way. After a run of degenerate
//! pivots the solver switches to Bland's rule until the objective moves.
//!
//! The dense inverse makes this the right tool for small and medium models;
//! large sparse models go through [`crate::sparse`].

use std::time::Instant;

use crate::error::{ModelError, SolveError};
use crate::model::{MilpModel, ObjectiveSense, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the model's own sense, constant included. Meaningful
    /// only when `status` is `Optimal`.
    pub objective: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: Option<usize>,
    pub degenerate_run_before_bland: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 64,
            max_iterations: None,
            degenerate_run_before_bland: 50,
        }
    }
}

/// LP in column-bounded form, minimization. Row terms are `(column, coef)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Added to `cost . x` to get the objective in minimization form.
    pub cost_offset: f64,
    /// `true` when the source objective was a maximization.
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LpProblem {
    /// Continuous relaxation of `model`; binaries keep their `[0,1]` box.
    pub fn relaxation_of(model: &MilpModel) -> Result<Self, ModelError> {
        if model.num_vars() == 0 {
            return Err(ModelError::Empty);
        }
        if !model.indicators.is_empty() {
            return Err(ModelError::PendingIndicators(model.indicators.len()));
        }
        let n = model.num_vars();
        let negated = model.objective.sense == ObjectiveSense::Maximize;
        let sign = if negated { -1.0 } else { 1.0 };
        Ok(Self {
            cost: model.objective.min_form_coefficients(n),
            lower: model.variables.iter().map(|v| v.lower).collect(),
            upper: model.variables.iter().map(|v| v.upper).collect(),
            rows: model
                .constraints
                .iter()
                .map(|c| LpRow {
                    terms: c.terms.iter().map(|&(v, a)| (v.0, a)).collect(),
                    sense: c.sense,
                    rhs: c.rhs,
                })
                .collect(),
            cost_offset: sign * model.objective.constant,
            negated,
        })
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    /// Objective in the source sense for a minimization-form value.
    pub fn source_objective(&self, min_form: f64) -> f64 {
        if self.negated {
            -min_form
        } else {
            min_form
        }
    }
}

/// Solves the continuous relaxation of `model` with the dense simplex.
pub fn solve_lp(model: &MilpModel) -> Result<LpSolution, SolveError> {
    model.validate()?;
    let lp = LpProblem::relaxation_of(model)?;
    DenseSimplex::default().solve(&lp, None)
}

#[derive(Debug, Clone, Default)]
pub struct DenseSimplex {
    pub options: SimplexOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable held at zero.
    Free,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted { degenerate: bool },
}

struct Tableau<'a> {
    opts: &'a SimplexOptions,
    m: usize,
    n_struct: usize,
    /// Column storage for structural variables: (row, coef).
    struct_cols: Vec<Vec<(usize, f64)>>,
    /// Artificial columns: (row, sign).
    art_cols: Vec<(usize, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl DenseSimplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn solve(
        &self,
        lp: &LpProblem,
        deadline: Option<Instant>,
    ) -> Result<LpSolution, SolveError> {
        let n = lp.num_cols();
        for j in 0..n {
            if lp.lower[j] > lp.upper[j] {
                return Ok(infeasible(n, 0));
            }
        }

        // Drop empty rows, checking that 0 (sense) rhs holds.
        let tol = self.options.feasibility_tol;
        let mut rows: Vec<&LpRow> = Vec::with_capacity(lp.rows.len());
        for row in &lp.rows {
            if row.terms.iter().all(|&(_, a)| a == 0.0) {
                let ok = match row.sense {
                    Sense::Le => 0.0 <= row.rhs + tol,
                    Sense::Ge => 0.0 >= row.rhs - tol,
                    Sense::Eq => row.rhs.abs() <= tol,
                };
                if !ok {
                    return Ok(infeasible(n, 0));
                }
            } else {
                rows.push(row);
            }
        }
        let m = rows.len();

        let mut struct_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                if a != 0.0 {
                    struct_cols[j].push((r, a));
                }
            }
        }
        for col in &mut struct_cols {
            // merge duplicate (row) entries
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }

        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for row in &rows {
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }

        let mut x = vec![0.0; n + m];
        let mut state = vec![VarState::AtLower; n + m];
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                x[j] = lo;
                state[j] = VarState::AtLower;
            } else if hi.is_finite() {
                x[j] = hi;
                state[j] = VarState::AtUpper;
            } else {
                x[j] = 0.0;
                state[j] = VarState::Free;
            }
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if x[j] != 0.0 {
                for &(r, a) in &struct_cols[j] {
                    activity[r] += a * x[j];
                }
            }
        }

        let mut basis = vec![0usize; m];
        let mut art_cols = Vec::new();
        let mut binv_diag = vec![0.0; m];
        for r in 0..m {
            let s = n + r;
            let act = activity[r];
            if act >= lower[s] - tol && act <= upper[s] + tol {
                x[s] = act;
                state[s] = VarState::Basic;
                basis[r] = s;
                binv_diag[r] = -1.0;
            } else {
                let target = if act < lower[s] { lower[s] } else { upper[s] };
                x[s] = target;
                state[s] = if target == lower[s] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                // a.x - s + sign * art = 0  =>  art = (s - a.x) / sign
                let sign = if target - act >= 0.0 { 1.0 } else { -1.0 };
                let art = n + m + art_cols.len();
                art_cols.push((r, sign));
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push((target - act).abs());
                state.push(VarState::Basic);
                basis[r] = art;
                binv_diag[r] = sign;
            }
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = binv_diag[r];
        }

        let mut t = Tableau {
            opts: &self.options,
            m,
            n_struct: n,
            struct_cols,
            art_cols,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            pivots_since_refactor: 0,
            iterations: 0,
        };
        let total = t.x.len();
        let max_iter = self
            .options
            .max_iterations
            .unwrap_or(10_000 + 50 * (m + total));

        // Phase 1
        if !t.art_cols.is_empty() {
            let mut cost1 = vec![0.0; total];
            for c in cost1.iter_mut().skip(n + m) {
                *c = 1.0;
            }
            match t.run(&cost1, max_iter, deadline)? {
                Some(LpStatus::Optimal) => {}
                Some(LpStatus::IterationLimit) | None => {
                    return Ok(t.finish(lp, LpStatus::IterationLimit));
                }
                Some(LpStatus::Unbounded) => {
                    return Err(SolveError::Numerical("phase 1 reported unbounded".into()));
                }
                Some(LpStatus::Infeasible) => unreachable!(),
            }
            t.refactor()?;
            let art_sum: f64 = (n + m..total).map(|j| t.x[j].abs()).sum();
            let scale = 1.0
                + rows
                    .iter()
                    .map(|r| r.rhs.abs())
                    .fold(0.0_f64, f64::max);
            if art_sum > tol * scale {
                return Ok(t.finish(lp, LpStatus::Infeasible));
            }
            for j in n + m..total {
                t.lower[j] = 0.0;
                t.upper[j] = 0.0;
                if t.state[j] != VarState::Basic {
                    t.x[j] = 0.0;
                    t.state[j] = VarState::AtLower;
                }
            }
        }

        // Phase 2
        let mut cost2 = vec![0.0; total];
        cost2[..n].copy_from_slice(&lp.cost);
        let status = match t.run(&cost2, max_iter, deadline)? {
            Some(s) => s,
            None => LpStatus::IterationLimit,
        };
        if status == LpStatus::Optimal {
            t.refactor()?;
        }
        Ok(t.finish(lp, status))
    }
}

fn infeasible(n: usize, iterations: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        objective: f64::NAN,
        values: vec![0.0; n],
        iterations,
    }
}

impl Tableau<'_> {
    fn column(&self, j: usize) -> ColIter<'_> {
        if j < self.n_struct {
            ColIter::Struct(self.struct_cols[j].iter())
        } else if j < self.n_struct + self.m {
            ColIter::Single(Some((j - self.n_struct, -1.0)))
        } else {
            let (r, s) = self.art_cols[j - self.n_struct - self.m];
            ColIter::Single(Some((r, s)))
        }
    }

    fn finish(&self, lp: &LpProblem, status: LpStatus) -> LpSolution {
        let values: Vec<f64> = self.x[..self.n_struct].to_vec();
        let objective = if status == LpStatus::Optimal {
            let min_form: f64 = lp
                .cost
                .iter()
                .zip(&values)
                .map(|(c, v)| c * v)
                .sum::<f64>()
                + lp.cost_offset;
            lp.source_objective(min_form)
        } else {
            f64::NAN
        };
        LpSolution {
            status,
            objective,
            values,
            iterations: self.iterations,
        }
    }

    /// Runs simplex iterations on `cost`. `Ok(None)` means the deadline hit.
    fn run(
        &mut self,
        cost: &[f64],
        max_iter: usize,
        deadline: Option<Instant>,
    ) -> Result<Option<LpStatus>, SolveError> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= max_iter {
                return Ok(Some(LpStatus::IterationLimit));
            }
            if let Some(d) = deadline {
                if self.iterations % 32 == 0 && Instant::now() >= d {
                    return Ok(None);
                }
            }
            match self.iterate(cost, bland)? {
                Step::Optimal => return Ok(Some(LpStatus::Optimal)),
                Step::Unbounded => return Ok(Some(LpStatus::Unbounded)),
                Step::Pivoted { degenerate } => {
                    self.iterations += 1;
                    if degenerate {
                        degenerate_run += 1;
                        if degenerate_run >= self.opts.degenerate_run_before_bland {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                        bland = false;
                    }
                }
            }
        }
    }

    fn iterate(&mut self, cost: &[f64], bland: bool) -> Result<Step, SolveError> {
        let m = self.m;
        let total = self.x.len();

        // duals y = c_B B^-1
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost[bj];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, &b) in y.iter_mut().zip(row) {
                    *yk += cb * b;
                }
            }
        }

        // pricing
        let opt_tol = self.opts.optimality_tol;
        let mut entering: Option<(usize, f64, f64)> = None; // (var, |d|, direction)
        for j in 0..total {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let mut d = cost[j];
            for (r, a) in self.column(j) {
                d -= y[r] * a;
            }
            let dir = match st {
                VarState::AtLower if d < -opt_tol => 1.0,
                VarState::AtUpper if d > opt_tol => -1.0,
                VarState::Free if d.abs() > opt_tol => -d.signum(),
                _ => continue,
            };
            if bland {
                entering = Some((j, d.abs(), dir));
                break;
            }
            match entering {
                Some((_, best, _)) if d.abs() <= best => {}
                _ => entering = Some((j, d.abs(), dir)),
            }
        }
        let Some((q, _, dir)) = entering else {
            return Ok(Step::Optimal);
        };

        // alpha = B^-1 a_q
        let mut alpha = vec![0.0; m];
        for (r, a) in self.column(q) {
            for (i, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[i * m + r] * a;
            }
        }

        // ratio test
        let piv_tol = self.opts.pivot_tol;
        let flip = self.upper[q] - self.lower[q];
        let mut best_t = f64::INFINITY;
        let mut leave: Option<(usize, bool)> = None; // (position, hits_lower)
        for i in 0..m {
            let rate = -dir * alpha[i];
            if rate.abs() <= piv_tol {
                continue;
            }
            let bj = self.basis[i];
            let (limit, hits_lower) = if rate < 0.0 {
                if !self.lower[bj].is_finite() {
                    continue;
                }
                (((self.x[bj] - self.lower[bj]) / -rate).max(0.0), true)
            } else {
                if !self.upper[bj].is_finite() {
                    continue;
                }
                (((self.upper[bj] - self.x[bj]) / rate).max(0.0), false)
            };
            let better = match leave {
                None => true,
                Some((pos, _)) => {
                    limit < best_t - 1e-12
                        || (limit <= best_t + 1e-12 && bj < self.basis[pos])
                }
            };
            if better {
                best_t = best_t.min(limit);
                leave = Some((i, hits_lower));
            }
        }

        if flip.is_finite() && flip <= best_t {
            // bound flip, basis unchanged
            let t = flip;
            self.x[q] += dir * t;
            for i in 0..m {
                let bj = self.basis[i];
                self.x[bj] -= dir * t * alpha[i];
            }
            self.state[q] = if dir > 0.0 {
                self.x[q] = self.upper[q];
                VarState::AtUpper
            } else {
                self.x[q] = self.lower[q];
                VarState::AtLower
            };
            return Ok(Step::Pivoted {
                degenerate: t <= 1e-12,
            });
        }
        let Some((r, hits_lower)) = leave else {
            return Ok(Step::Unbounded);
        };
        let t = best_t;
        self.x[q] += dir * t;
        for i in 0..m {
            let bj = self.basis[i];
            self.x[bj] -= dir * t * alpha[i];
        }
        let out = self.basis[r];
        if hits_lower {
            self.x[out] = self.lower[out];
            self.state[out] = VarState::AtLower;
        } else {
            self.x[out] = self.upper[out];
            self.state[out] = VarState::AtUpper;
        }
        self.state[q] = VarState::Basic;
        self.basis[r] = q;

        // update inverse
        let piv = alpha[r];
        {
            let row_r: Vec<f64> = self.binv[r * m..(r + 1) * m]
                .iter()
                .map(|v| v / piv)
                .collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = alpha[i];
                if f != 0.0 {
                    let row = &mut self.binv[i * m..(i + 1) * m];
                    for (b, &rv) in row.iter_mut().zip(&row_r) {
                        *b -= f * rv;
                    }
                }
            }
            self.binv[r * m..(r + 1) * m].copy_from_slice(&row_r);
        }
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= self.opts.refactor_every {
            self.refactor()?;
        }
        Ok(Step::Pivoted {
            degenerate: t <= 1e-12,
        })
    }

    /// Recomputes `B^-1` by Gauss-Jordan elimination and the basic values
    /// from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        self.pivots_since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut b = vec![0.0; m * m];
        for (i, &bj) in self.basis.iter().enumerate() {
            for (r, a) in self.column(bj) {
                b[r * m + i] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = b[col * m + col].abs();
            for r in col + 1..m {
                let v = b[r * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return Err(SolveError::Numerical("singular basis at refactorization".into()));
            }
            if piv_row != col {
                for k in 0..m {
                    b.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let p = b[col * m + col];
            for k in 0..m {
                b[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        b[r * m + k] -= f * b[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;

        // B x_B = - sum_nonbasic a_j x_j
        let mut rhs = vec![0.0; m];
        for j in 0..self.x.len() {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (r, a) in self.column(j) {
                rhs[r] -= a * xj;
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            let bj = self.basis[i];
            self.x[bj] = v;
        }
        Ok(())
    }
}

enum ColIter<'a> {
    Struct(std::slice::Iter<'a, (usize, f64)>),
    Single(Option<(usize, f64)>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Struct(it) => it.next().copied(),
            ColIter::Single(v) => v.take(),
        }
    }
}
