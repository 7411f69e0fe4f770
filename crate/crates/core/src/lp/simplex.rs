//! Bounded-variable revised simplex (maximization).
//!
//! Rows become equalities `A x + s = b` with one slack per row; the slack's
//! bounds encode the row sense. Phase 1 maximizes minus the sum of bound
//! violations of the basic variables, phase 2 the model objective. Pricing
//! is Dantzig's rule; after a run of degenerate pivots the solver falls back
//! to Bland's smallest-index rule until the objective moves again.

use log::trace;
use web_time::Instant;

use super::factor::Factor;
use super::{Basis, LinearModel, LpOptions, LpSolution, LpStatus, Sense, VarStatus};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN_FOR_BLAND: usize = 30;

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

struct Simplex {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    b: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    factor: Option<Factor>,
    etas: Vec<Eta>,
}

/// Solves the LP relaxation of `model` (integrality flags ignored).
pub fn solve_lp(model: &LinearModel, opts: &LpOptions) -> LpSolution {
    let lb: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
    let ub: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(model, &lb, &ub, opts)
}

/// Like [`solve_lp`] but with the structural bounds replaced.
pub fn solve_lp_with_bounds(model: &LinearModel, lower: &[f64], upper: &[f64], opts: &LpOptions) -> LpSolution {
    let start = Instant::now();
    let n = model.num_vars();
    let m = model.num_rows();
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return failed(LpStatus::Infeasible, n, m, 0);
    }
    let mut s = Simplex::new(model, lower, upper);
    if let Some(basis) = &opts.warm_start {
        s.load_basis(basis);
    }
    let deadline = opts.effective_deadline(start);
    let max_iter = opts.max_iterations.unwrap_or(100_000 + 50 * (n + m));
    s.run(deadline, max_iter)
}

fn failed(status: LpStatus, n: usize, m: usize, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        primal: vec![0.0; n],
        duals: vec![0.0; m],
        objective: 0.0,
        iterations,
        basis: None,
    }
}

impl Simplex {
    fn new(model: &LinearModel, lower: &[f64], upper: &[f64]) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        let mut b = Vec::with_capacity(m);
        let mut lb = lower.to_vec();
        let mut ub = upper.to_vec();
        let mut cost: Vec<f64> = model.vars.iter().map(|v| v.obj).collect();
        for (r, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    match cols[j].last_mut() {
                        Some(last) if last.0 == r => last.1 += a,
                        _ => cols[j].push((r, a)),
                    }
                }
            }
            cols[n + r].push((r, 1.0));
            b.push(row.rhs);
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lb.push(l);
            ub.push(u);
            cost.push(0.0);
        }
        // a variable listed twice in one row can leave non-adjacent duplicates
        for col in cols.iter_mut().take(n) {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|e| e.1 != 0.0);
        }
        let mut status = vec![VarStatus::AtLower; n + m];
        let mut head = Vec::with_capacity(m);
        for r in 0..m {
            status[n + r] = VarStatus::Basic;
            head.push(n + r);
        }
        let mut x = vec![0.0; n + m];
        x[..n].copy_from_slice(&lb[..n]);
        Simplex {
            m,
            n,
            cols,
            lb,
            ub,
            cost,
            b,
            head,
            status,
            x,
            factor: None,
            etas: Vec::new(),
        }
    }

    fn load_basis(&mut self, basis: &Basis) {
        let total = self.n + self.m;
        if basis.status.len() != total || basis.num_vars != self.n {
            return;
        }
        let basic: Vec<usize> = (0..total).filter(|&j| basis.status[j] == VarStatus::Basic).collect();
        if basic.len() != self.m {
            return;
        }
        self.head = basic;
        self.status = basis.status.clone();
    }

    fn place_nonbasic(&mut self) {
        for j in 0..self.n + self.m {
            match self.status[j] {
                VarStatus::Basic => {}
                VarStatus::AtLower => {
                    if self.lb[j].is_finite() {
                        self.x[j] = self.lb[j];
                    } else {
                        self.status[j] = VarStatus::AtUpper;
                        self.x[j] = self.ub[j];
                    }
                }
                VarStatus::AtUpper => {
                    if self.ub[j].is_finite() {
                        self.x[j] = self.ub[j];
                    } else {
                        self.status[j] = VarStatus::AtLower;
                        self.x[j] = self.lb[j];
                    }
                }
            }
        }
    }

    /// Factorizes the current basis, swapping in slacks for dependent columns.
    fn refactor(&mut self) -> bool {
        self.etas.clear();
        for _ in 0..=self.m {
            let cols = self.head.iter().map(|&j| self.cols[j].clone()).collect();
            match Factor::new(self.m, cols) {
                Ok(f) => {
                    self.factor = Some(f);
                    return true;
                }
                Err(sing) => {
                    trace!("repairing singular basis: {} column(s)", sing.positions.len());
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.head[pos];
                        let slack = self.n + row;
                        if self.status[slack] == VarStatus::Basic {
                            return false;
                        }
                        self.status[old] = if (self.x[old] - self.lb[old]).abs() <= (self.x[old] - self.ub[old]).abs() {
                            VarStatus::AtLower
                        } else {
                            VarStatus::AtUpper
                        };
                        self.head[pos] = slack;
                        self.status[slack] = VarStatus::Basic;
                    }
                    self.place_nonbasic();
                }
            }
        }
        false
    }

    fn ftran(&self, rhs: &[f64]) -> Vec<f64> {
        let mut v = self.factor.as_ref().expect("factorized").ftran(rhs);
        for eta in &self.etas {
            let xp = v[eta.pos] / eta.pivot;
            if xp != 0.0 {
                for &(i, a) in &eta.entries {
                    v[i] -= a * xp;
                }
            }
            v[eta.pos] = xp;
        }
        v
    }

    fn btran(&self, c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        self.factor.as_ref().expect("factorized").btran(&c)
    }

    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        for &(r, v) in &self.cols[j] {
            a[r] = v;
        }
        a
    }

    fn compute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.n + self.m {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                for &(r, v) in &self.cols[j] {
                    rhs[r] -= v * self.x[j];
                }
            }
        }
        let xb = self.ftran(&rhs);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    fn infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&j| (self.lb[j] - self.x[j]).max(self.x[j] - self.ub[j]).max(0.0))
            .filter(|&v| v > PRIMAL_TOL)
            .sum()
    }

    fn reduced_cost(&self, j: usize, phase1: bool, y: &[f64]) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[j] };
        c - self.cols[j].iter().map(|&(r, v)| v * y[r]).sum::<f64>()
    }

    fn run(&mut self, deadline: Option<Instant>, max_iter: usize) -> LpSolution {
        let (n, m) = (self.n, self.m);
        self.place_nonbasic();
        if !self.refactor() {
            return failed(LpStatus::NumericalFailure, n, m, 0);
        }
        self.compute_basic_values();

        let mut iterations = 0usize;
        let mut degenerate_run = 0usize;
        let mut confirmations = 0usize;
        loop {
            if self.etas.len() >= REFACTOR_EVERY {
                if !self.refactor() {
                    return failed(LpStatus::NumericalFailure, n, m, iterations);
                }
                self.compute_basic_values();
            }
            if iterations >= max_iter || deadline.is_some_and(|d| Instant::now() >= d) {
                return failed(LpStatus::Limit, n, m, iterations);
            }

            let phase1 = self.infeasibility() > 0.0;
            let cb: Vec<f64> = self
                .head
                .iter()
                .map(|&j| {
                    if phase1 {
                        if self.x[j] < self.lb[j] - PRIMAL_TOL {
                            1.0
                        } else if self.x[j] > self.ub[j] + PRIMAL_TOL {
                            -1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.cost[j]
                    }
                })
                .collect();
            let y = self.btran(&cb);

            let bland = degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..n + m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lb[j] == self.ub[j] {
                    continue;
                }
                let d = self.reduced_cost(j, phase1, &y);
                let dir = match st {
                    VarStatus::AtLower if d > DUAL_TOL => 1.0,
                    VarStatus::AtUpper if d < -DUAL_TOL => -1.0,
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }

            let Some((q, dir)) = entering else {
                if phase1 {
                    return failed(LpStatus::Infeasible, n, m, iterations);
                }
                // confirm optimality on a fresh factorization
                if !self.etas.is_empty() && confirmations < 3 {
                    confirmations += 1;
                    if !self.refactor() {
                        return failed(LpStatus::NumericalFailure, n, m, iterations);
                    }
                    self.compute_basic_values();
                    continue;
                }
                return self.finish(y, iterations);
            };

            let alpha = self.ftran(&self.column_dense(q));
            // x_B moves by -dir * alpha * t
            let mut t_best = self.ub[q] - self.lb[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0f64;
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let rate = -dir * a;
                let xj = self.x[j];
                let below = xj < self.lb[j] - PRIMAL_TOL;
                let above = xj > self.ub[j] + PRIMAL_TOL;
                let (limit, bound) = if below {
                    if rate > 0.0 {
                        ((self.lb[j] - xj) / rate, self.lb[j])
                    } else {
                        continue;
                    }
                } else if above {
                    if rate < 0.0 {
                        ((xj - self.ub[j]) / -rate, self.ub[j])
                    } else {
                        continue;
                    }
                } else if rate < 0.0 {
                    if self.lb[j].is_finite() {
                        (((xj - self.lb[j]) / -rate).max(0.0), self.lb[j])
                    } else {
                        continue;
                    }
                } else if self.ub[j].is_finite() {
                    (((self.ub[j] - xj) / rate).max(0.0), self.ub[j])
                } else {
                    continue;
                };
                let take = match leave {
                    None => limit < t_best,
                    Some((lp, _)) => {
                        if limit < t_best - 1e-12 {
                            true
                        } else if limit <= t_best + 1e-12 {
                            if bland {
                                j < self.head[lp]
                            } else {
                                a.abs() > leave_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    t_best = t_best.min(limit);
                    leave = Some((p, bound));
                    leave_alpha = a.abs();
                }
            }

            if !t_best.is_finite() {
                if phase1 {
                    return failed(LpStatus::NumericalFailure, n, m, iterations);
                }
                return failed(LpStatus::Unbounded, n, m, iterations);
            }

            iterations += 1;
            if t_best > 1e-12 {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }

            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let j = self.head[p];
                    self.x[j] -= dir * a * t_best;
                }
            }
            self.x[q] += dir * t_best;

            match leave {
                None => {
                    // bound flip
                    self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                }
                Some((p, bound)) => {
                    let out = self.head[p];
                    self.x[out] = bound;
                    self.status[out] = if bound == self.lb[out] {
                        VarStatus::AtLower
                    } else {
                        VarStatus::AtUpper
                    };
                    self.status[q] = VarStatus::Basic;
                    self.head[p] = q;
                    let entries = alpha
                        .iter()
                        .enumerate()
                        .filter(|&(i, &a)| i != p && a.abs() > 1e-14)
                        .map(|(i, &a)| (i, a))
                        .collect();
                    self.etas.push(Eta {
                        pos: p,
                        pivot: alpha[p],
                        entries,
                    });
                }
            }
        }
    }

    fn finish(&self, y: Vec<f64>, iterations: usize) -> LpSolution {
        let primal: Vec<f64> = self.x[..self.n].to_vec();
        let objective = primal.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        LpSolution {
            status: LpStatus::Optimal,
            primal,
            duals: y,
            objective,
            iterations,
            basis: Some(Basis {
                num_vars: self.n,
                status: self.status.clone(),
            }),
        }
    }
}
