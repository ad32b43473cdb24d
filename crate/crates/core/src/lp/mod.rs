//! Dense linear programming.
//!
//! Every metric quantity in this crate (Monge-Kantorovich distances, quotient
//! seminorms, distances to convex sets of states) is the value of a small
//! dense linear program. This module owns the program representation and a
//! bounded-variable primal simplex with Bland's rule; callers go through
//! [`solve`] or any other [`LpSolver`] implementation.

mod scalar;
mod simplex;

pub use scalar::{parse_rational, LpScalar};
pub use simplex::DenseSimplex;

use num_rational::BigRational;
use std::fmt;

/// Feasibility tolerance for the double precision engine.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Optimality (reduced cost) tolerance for the double precision engine.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Pivot cap; exceeding it yields [`LpStatus::IterationLimit`].
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Row<T> {
    pub coeffs: Vec<T>,
    pub sense: RowSense,
    pub rhs: T,
}

/// `optimize c·x  s.t.  rows,  lower ≤ x ≤ upper`.
///
/// Bounds default to `0 ≤ x < ∞`; `None` means infinite in that direction.
#[derive(Debug, Clone)]
pub struct LinearProgram<T = f64> {
    pub objective: Objective,
    pub cost: Vec<T>,
    pub rows: Vec<Row<T>>,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The final basis failed its primal/dual certificate check.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T = f64> {
    pub status: LpStatus,
    /// Objective value in the program's own sense; meaningful when optimal.
    pub value: T,
    pub x: Vec<T>,
    /// Row duals: the sensitivity of `value` to each right-hand side.
    pub duals: Vec<T>,
    pub iterations: usize,
}

impl<T> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("row {row} has {found} coefficients, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("variable {0} has lower bound above upper bound")]
    EmptyBox(usize),
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(num_vars: usize, objective: Objective) -> Self {
        Self {
            objective,
            cost: vec![T::zero(); num_vars],
            rows: Vec::new(),
            lower: vec![Some(T::zero()); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn set_cost(&mut self, var: usize, value: T) -> &mut Self {
        self.cost[var] = value;
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    pub fn add_row(&mut self, coeffs: Vec<T>, sense: RowSense, rhs: T) -> &mut Self {
        self.rows.push(Row { coeffs, sense, rhs });
        self
    }

    /// Adds a row from sparse `(index, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, entries: &[(usize, T)], sense: RowSense, rhs: T) -> &mut Self {
        let mut coeffs = vec![T::zero(); self.num_vars()];
        for (j, v) in entries {
            coeffs[*j] = coeffs[*j].clone() + v.clone();
        }
        self.add_row(coeffs, sense, rhs)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::RowLength { row: i, found: row.coeffs.len(), expected: n });
            }
        }
        if !T::is_exact() {
            let finite = |v: &T| v.as_f64().is_finite();
            if !self.cost.iter().all(finite) {
                return Err(LpError::NonFinite("objective"));
            }
            if !self.rows.iter().all(|r| r.coeffs.iter().all(finite) && finite(&r.rhs)) {
                return Err(LpError::NonFinite("constraints"));
            }
        }
        for j in 0..n {
            if let (Some(lo), Some(hi)) = (&self.lower[j], &self.upper[j]) {
                if lo > hi {
                    return Err(LpError::EmptyBox(j));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        let mut bump = |v: T| {
            if v > worst {
                worst = v;
            }
        };
        for row in &self.rows {
            let lhs = row.coeffs.iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            let gap = lhs - row.rhs.clone();
            match row.sense {
                RowSense::Le => bump(gap),
                RowSense::Ge => bump(-gap),
                RowSense::Eq => bump(gap.abs_val()),
            }
        }
        for (j, v) in x.iter().enumerate() {
            if let Some(lo) = &self.lower[j] {
                bump(lo.clone() - v.clone());
            }
            if let Some(hi) = &self.upper[j] {
                bump(v.clone() - hi.clone());
            }
        }
        worst
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.cost.iter().zip(x).fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }
}

impl LinearProgram<f64> {
    /// The same program over the rationals; every finite double is exact.
    pub fn to_rational(&self) -> LinearProgram<BigRational> {
        let q = |v: &f64| BigRational::from_float(*v).expect("validated programs are finite");
        LinearProgram {
            objective: self.objective,
            cost: self.cost.iter().map(q).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| Row { coeffs: r.coeffs.iter().map(q).collect(), sense: r.sense, rhs: q(&r.rhs) })
                .collect(),
            lower: self.lower.iter().map(|v| v.as_ref().map(q)).collect(),
            upper: self.upper.iter().map(|v| v.as_ref().map(q)).collect(),
        }
    }
}

impl LpSolution<BigRational> {
    pub fn to_f64(&self) -> LpSolution<f64> {
        LpSolution {
            status: self.status,
            value: self.value.as_f64(),
            x: self.x.iter().map(LpScalar::as_f64).collect(),
            duals: self.duals.iter().map(LpScalar::as_f64).collect(),
            iterations: self.iterations,
        }
    }
}

/// Plain-text tableau dump, one row per line.
impl<T: LpScalar> fmt::Display for LinearProgram<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match self.objective {
            Objective::Maximize => "maximize",
            Objective::Minimize => "minimize",
        };
        writeln!(f, "{head} {} vars {} rows", self.num_vars(), self.rows.len())?;
        write!(f, "  c  :")?;
        for c in &self.cost {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "  r{i:<3}:")?;
            for a in &row.coeffs {
                write!(f, " {a}")?;
            }
            writeln!(f, " {} {}", row.sense, row.rhs)?;
        }
        for j in 0..self.num_vars() {
            let lo = self.lower[j].as_ref().map_or("-inf".to_string(), |v| v.to_string());
            let hi = self.upper[j].as_ref().map_or("+inf".to_string(), |v| v.to_string());
            writeln!(f, "  x{j:<3}: [{lo}, {hi}]")?;
        }
        Ok(())
    }
}

/// Solver boundary: anything that can solve a [`LinearProgram`].
pub trait LpSolver<T: LpScalar> {
    fn solve(&self, program: &LinearProgram<T>) -> Result<LpSolution<T>, LpError>;
}

/// Solves with the default dense simplex engine.
pub fn solve<T: LpScalar>(program: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    DenseSimplex::default().solve(program)
}
