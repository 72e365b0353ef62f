//! Test oracles, deliberately independent of the kernel's solver code.
//!
//! `lp` is a textbook two-phase tableau simplex over `y = x - lower >= 0`
//! with Bland's rule everywhere. `enumerate` walks every binary assignment
//! and solves the continuous remainder with it.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coef: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Minimize `cost . x` over finite boxes and rows.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal(f64, Vec<f64>),
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

pub fn lp(p: &DenseLp) -> Outcome {
    let n = p.cost.len();
    if p.lower.iter().zip(&p.upper).any(|(l, u)| l > u) {
        return Outcome::Infeasible;
    }
    // rows in y-space, rhs made non-negative
    let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
    for r in &p.rows {
        let shift: f64 = r.coef.iter().zip(&p.lower).map(|(a, l)| a * l).sum();
        rows.push((r.coef.clone(), r.rel, r.rhs - shift));
    }
    for j in 0..n {
        if p.upper[j].is_finite() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            rows.push((e, Rel::Le, p.upper[j] - p.lower[j]));
        }
    }
    for r in rows.iter_mut() {
        if r.2 < 0.0 {
            r.0.iter_mut().for_each(|a| *a = -*a);
            r.2 = -r.2;
            r.1 = match r.1 {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Rel::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Rel::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;
    // tableau: m rows of [cols | rhs]
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (n, art_start);
    for (i, (coef, rel, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coef);
        t[i][cols] = *rhs;
        match rel {
            Rel::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Rel::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            Rel::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }

    // phase 1
    if n_art > 0 {
        let mut c1 = vec![0.0; cols];
        c1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        if run(&mut t, &mut basis, &c1, cols).is_err() {
            unreachable!("phase 1 is bounded");
        }
        let infeas: f64 = (0..m)
            .filter(|&i| basis[i] >= art_start)
            .map(|i| t[i][cols])
            .sum();
        if infeas > 1e-7 {
            return Outcome::Infeasible;
        }
        // drive zero-level artificials out of the basis, drop redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| t[i][j].abs() > EPS) {
                    pivot(&mut t, &mut basis, i, j, cols);
                } else {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for row in t.iter_mut() {
            row[art_start..cols].iter_mut().for_each(|v| *v = 0.0);
        }
    }

    // phase 2
    let mut c2 = vec![0.0; cols];
    c2[..n].copy_from_slice(&p.cost);
    if run(&mut t, &mut basis, &c2, art_start).is_err() {
        return Outcome::Unbounded;
    }
    let mut y = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        y[b] = t[i][cols];
    }
    let x: Vec<f64> = (0..n).map(|j| y[j] + p.lower[j]).collect();
    let obj = p.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Outcome::Optimal(obj, x)
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize, cols: usize) {
    let pv = t[r][c];
    for v in t[r].iter_mut() {
        *v /= pv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for k in 0..=cols {
                row[k] -= f * prow[k];
            }
        }
    }
    basis[r] = c;
}

/// Minimizes `cost` with Bland's rule; only columns `< allowed` may enter.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Result<(), ()> {
    let cols = cost.len();
    loop {
        // reduced cost d_j = c_j - c_B . column_j
        let mut enter = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let d = cost[j]
                - basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * t[i][j])
                    .sum::<f64>();
            if d < -EPS {
                enter = Some(j);
                break;
            }
        }
        let Some(j) = enter else { return Ok(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > EPS {
                let ratio = t[i][cols] / t[i][j];
                match leave {
                    Some((li, lr))
                        if ratio > lr + EPS || (ratio > lr - EPS && basis[i] > basis[li]) => {}
                    _ => leave = Some((i, ratio)),
                }
            }
        }
        let Some((r, _)) = leave else { return Err(()) };
        pivot(t, basis, r, j, cols);
    }
}

/// Mixed problem for enumeration: the first `n_bin` variables are binary.
#[derive(Debug, Clone)]
pub struct MixedProblem {
    pub n_bin: usize,
    /// Minimize.
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// `product = left * right`, all binary indices; the product's own
    /// value is computed, not enumerated.
    pub products: Vec<(usize, usize, usize)>,
    /// Indicators: (guards (var, value), implied row).
    pub indicators: Vec<(Vec<(usize, bool)>, Row)>,
}

/// Best objective over every binary assignment, or `None` if infeasible.
pub fn enumerate(p: &MixedProblem) -> Option<f64> {
    let n = p.cost.len();
    let derived: Vec<usize> = p.products.iter().map(|t| t.2).collect();
    let free_bins: Vec<usize> = (0..p.n_bin).filter(|j| !derived.contains(j)).collect();
    let cont: Vec<usize> = (p.n_bin..n).collect();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1u64 << free_bins.len()) {
        let mut bin = vec![0.0; p.n_bin];
        for (k, &j) in free_bins.iter().enumerate() {
            bin[j] = ((mask >> k) & 1) as f64;
        }
        for &(l, r, prod) in &p.products {
            bin[prod] = bin[l] * bin[r];
        }
        if bin
            .iter()
            .enumerate()
            .any(|(j, &v)| v < p.lower[j] || v > p.upper[j])
        {
            continue;
        }
        let mut rows: Vec<&Row> = p.rows.iter().collect();
        for (guards, row) in &p.indicators {
            if guards.iter().all(|&(g, val)| (bin[g] == 1.0) == val) {
                rows.push(row);
            }
        }
        let fixed_cost: f64 = (0..p.n_bin).map(|j| p.cost[j] * bin[j]).sum();
        let sub = DenseLp {
            cost: cont.iter().map(|&j| p.cost[j]).collect(),
            lower: cont.iter().map(|&j| p.lower[j]).collect(),
            upper: cont.iter().map(|&j| p.upper[j]).collect(),
            rows: rows
                .iter()
                .map(|r| {
                    let fixed: f64 = (0..p.n_bin).map(|j| r.coef[j] * bin[j]).sum();
                    Row {
                        coef: cont.iter().map(|&j| r.coef[j]).collect(),
                        rel: r.rel,
                        rhs: r.rhs - fixed,
                    }
                })
                .collect(),
        };
        let value = if cont.is_empty() {
            let ok = sub.rows.iter().all(|r| match r.rel {
                Rel::Le => 0.0 <= r.rhs + 1e-9,
                Rel::Ge => 0.0 >= r.rhs - 1e-9,
                Rel::Eq => r.rhs.abs() <= 1e-9,
            });
            ok.then_some(0.0)
        } else {
            match lp(&sub) {
                Outcome::Optimal(v, _) => Some(v),
                Outcome::Infeasible => None,
                Outcome::Unbounded => panic!("oracle problems are bounded"),
            }
        };
        if let Some(v) = value {
            let total = v + fixed_cost;
            if best.is_none_or(|b| total < b) {
                best = Some(total);
            }
        }
    }
    best
}

#[cfg(test)]
mod self_check {
    #[test]
    fn oracle_hand_example() {
        use super::*;
        // max 3x+2y, x+y<=4, x<=2 -> 10
        let p = DenseLp {
            cost: vec![-3.0, -2.0],
            lower: vec![0.0, 0.0],
            upper: vec![2.0, f64::INFINITY],
            rows: vec![Row {
                coef: vec![1.0, 1.0],
                rel: Rel::Le,
                rhs: 4.0,
            }],
        };
        match lp(&p) {
            Outcome::Optimal(v, x) => {
                assert!((v + 10.0).abs() < 1e-9);
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }
}
