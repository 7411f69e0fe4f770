//! Linear and mixed-binary programming.
//!
//! Every model is a maximization over bounded variables. [`solve_lp`] is a
//! bounded-variable revised simplex that returns row duals; [`solve_mip`]
//! runs best-bound branch and bound on top of it.

mod factor;
mod mip;
mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::error::{Error, Result};

pub use mip::{solve_mip, MipOptions, MipSolution, MipStatus};
pub use simplex::{solve_lp, solve_lp_with_bounds};

/// Primal feasibility tolerance promised on optimal LP results.
pub const FEAS_TOL: f64 = 1e-7;
/// Distance from an integer below which a flagged variable counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Default relative MIP gap.
pub const DEFAULT_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
    pub integer: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max obj·x` subject to sparse rows and finite variable bounds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, obj: f64, integer: bool) -> usize {
        self.vars.push(Variable {
            lower,
            upper,
            obj,
            integer,
        });
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if !(v.lower.is_finite() && v.upper.is_finite() && v.obj.is_finite()) {
                return Err(Error::Input(format!("variable {j} needs finite bounds and objective")));
            }
            if v.lower > v.upper {
                return Err(Error::Input(format!("variable {j} has lower {} > upper {}", v.lower, v.upper)));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Input(format!("row {r} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.vars.len() || !a.is_finite() {
                    return Err(Error::Input(format!("row {r} references variable {j} with coefficient {a}")));
                }
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, xi)| v.obj * xi).sum()
    }

    pub fn row_activity(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let act = self.row_activity(r, x);
            let viol = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Plain-text dump in the spirit of the CPLEX LP format.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::from("Maximize\n obj:");
        let term = |out: &mut String, a: f64, j: usize| {
            let _ = write!(out, " {} {} x{j}", if a < 0.0 { "-" } else { "+" }, a.abs());
        };
        for (j, v) in self.vars.iter().enumerate() {
            if v.obj != 0.0 {
                term(&mut out, v.obj, j);
            }
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{r}:");
            for &(j, a) in &row.coeffs {
                term(&mut out, a, j);
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            let _ = writeln!(out, " {} <= x{j} <= {}", v.lower, v.upper);
        }
        let ints: Vec<String> = (0..self.vars.len())
            .filter(|&j| self.vars[j].integer)
            .map(|j| format!("x{j}"))
            .collect();
        if !ints.is_empty() {
            let _ = writeln!(out, "General\n {}", ints.join(" "));
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or iteration limit reached.
    Limit,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Status of every structural column followed by every row slack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub num_vars: usize,
    pub status: Vec<VarStatus>,
}

impl Basis {
    /// Re-targets this basis to a model that appended `extra_vars` columns
    /// after the existing structurals (rows unchanged). New columns start
    /// nonbasic at their lower bound.
    pub fn extend_vars(&self, extra_vars: usize) -> Basis {
        let mut status = Vec::with_capacity(self.status.len() + extra_vars);
        status.extend_from_slice(&self.status[..self.num_vars]);
        status.extend(std::iter::repeat_n(VarStatus::AtLower, extra_vars));
        status.extend_from_slice(&self.status[self.num_vars..]);
        Basis {
            num_vars: self.num_vars + extra_vars,
            status,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One value per row: the change in optimal objective per unit of rhs.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

#[derive(Clone, Debug, Default)]
pub struct LpOptions {
    pub time_limit: Option<Duration>,
    pub deadline: Option<Instant>,
    pub max_iterations: Option<usize>,
    pub warm_start: Option<Basis>,
}

impl LpOptions {
    pub(crate) fn effective_deadline(&self, start: Instant) -> Option<Instant> {
        let from_limit = self.time_limit.map(|t| start + t);
        match (from_limit, self.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}
