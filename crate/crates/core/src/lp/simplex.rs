//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Variables are rewritten to live in `[0, U]` (shift, mirror or split),
//! inequality rows get slacks, every row gets an artificial column. Phase I
//! drives the artificials to zero; Phase II then pins them to `[0, 0]` and
//! optimizes the real cost. Entering and leaving choices follow Bland's rule,
//! so the method terminates on degenerate programs. The artificial block of
//! the tableau holds the basis inverse, which gives the row duals.

use super::{
    LinearProgram, LpError, LpScalar, LpSolution, LpSolver, LpStatus, Objective, RowSense, FEASIBILITY_TOL,
    MAX_ITERATIONS, OPTIMALITY_TOL,
};

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub max_iterations: usize,
    /// Re-verify primal and dual feasibility from the original data.
    pub check_certificate: bool,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self { max_iterations: MAX_ITERATIONS, check_certificate: true }
    }
}

#[derive(Debug, Clone)]
enum ColMap<T> {
    /// x = lo + y
    Shift { col: usize, lo: T },
    /// x = hi − y
    Mirror { col: usize, hi: T },
    /// x = y⁺ − y⁻
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

/// Fresh factorizations tried before reporting a numerical failure.
const REINVERSIONS: usize = 3;

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau<T> {
    m: usize,
    ncols: usize,
    first_art: usize,
    /// original internal constraint matrix (with slacks and artificials)
    a0: Vec<Vec<T>>,
    b0: Vec<T>,
    t: Vec<Vec<T>>,
    beta: Vec<T>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    upper: Vec<Option<T>>,
    iterations: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn reduced_cost(&self, cost: &[T], j: usize) -> T {
        let mut d = cost[j].clone();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if !cb.is_zero() && !self.t[i][j].is_zero() {
                d = d - cb.clone() * self.t[i][j].clone();
            }
        }
        d
    }

    fn entering(&self, cost: &[T]) -> Option<usize> {
        let tol = T::optimality_tol();
        (0..self.ncols).find(|&j| match self.state[j] {
            ColState::Basic => false,
            ColState::AtLower => {
                if matches!(&self.upper[j], Some(u) if u.is_zero()) {
                    return false;
                }
                self.reduced_cost(cost, j) < -tol.clone()
            }
            ColState::AtUpper => self.reduced_cost(cost, j) > tol.clone(),
        })
    }

    fn run(&mut self, cost: &[T], max_iterations: usize) -> PhaseEnd {
        let ptol = T::pivot_tol();
        loop {
            if self.iterations >= max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let Some(j) = self.entering(cost) else {
                return PhaseEnd::Optimal;
            };
            self.iterations += 1;
            let increasing = self.state[j] == ColState::AtLower;

            // rate of change of each basic variable per unit step
            let rates: Vec<T> =
                (0..self.m).map(|i| if increasing { -self.t[i][j].clone() } else { self.t[i][j].clone() }).collect();

            let mut best: Option<T> = None;
            let mut row_ratios: Vec<Option<T>> = vec![None; self.m];
            for i in 0..self.m {
                let r = &rates[i];
                let ratio = if *r < -ptol.clone() {
                    Some(self.beta[i].clone() / (-r.clone()))
                } else if *r > ptol {
                    self.upper[self.basis[i]].as_ref().map(|u| (u.clone() - self.beta[i].clone()) / r.clone())
                } else {
                    None
                };
                if let Some(mut ratio) = ratio {
                    if ratio < T::zero() {
                        ratio = T::zero();
                    }
                    if best.as_ref().is_none_or(|b| ratio < *b) {
                        best = Some(ratio.clone());
                    }
                    row_ratios[i] = Some(ratio);
                }
            }

            let flip_len = self.upper[j].clone();
            let flip = match (&flip_len, &best) {
                (Some(u), Some(b)) => u <= b,
                (Some(_), None) => true,
                (None, _) => false,
            };

            if flip {
                let step = flip_len.unwrap();
                for i in 0..self.m {
                    self.beta[i] = self.beta[i].clone() + step.clone() * rates[i].clone();
                }
                self.state[j] = if increasing { ColState::AtUpper } else { ColState::AtLower };
                continue;
            }

            let Some(theta) = best else {
                return PhaseEnd::Unbounded;
            };

            // Bland: among tied rows take the smallest basic index
            let tie = theta.clone() + ptol.clone();
            let r = (0..self.m)
                .filter(|&i| matches!(&row_ratios[i], Some(q) if *q <= tie))
                .min_by_key(|&i| self.basis[i])
                .expect("ratio test produced a minimum");

            for i in 0..self.m {
                self.beta[i] = self.beta[i].clone() + theta.clone() * rates[i].clone();
            }
            let leaving = self.basis[r];
            self.state[leaving] = if rates[r] < T::zero() { ColState::AtLower } else { ColState::AtUpper };
            self.beta[r] = if increasing {
                theta
            } else {
                self.upper[j].clone().expect("at-upper column has an upper bound") - theta
            };
            self.pivot(r, j);
            self.basis[r] = j;
            self.state[j] = ColState::Basic;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j].clone();
        for v in self.t[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let pivot_row = self.t[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i][j].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.t[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            self.t[i][j] = T::zero();
        }
    }

    /// Rebuilds `B⁻¹A` from the original rows by Gauss-Jordan elimination
    /// on the basis columns, discarding the error accumulated by pivoting.
    /// Returns false when the basis matrix is numerically singular.
    fn reinvert(&mut self) -> bool {
        let mut t = self.a0.clone();
        for i in 0..self.m {
            let col = self.basis[i];
            let p = (i..self.m)
                .max_by(|&a, &b| t[a][col].abs_val().partial_cmp(&t[b][col].abs_val()).expect("ordered"))
                .expect("rows left");
            if t[p][col].abs_val() <= T::pivot_tol() {
                return false;
            }
            t.swap(i, p);
            let piv = t[i][col].clone();
            for v in t[i].iter_mut() {
                if !v.is_zero() {
                    *v = v.clone() / piv.clone();
                }
            }
            let row = t[i].clone();
            for (k, other) in t.iter_mut().enumerate() {
                if k == i {
                    continue;
                }
                let f = other[col].clone();
                if f.is_zero() {
                    continue;
                }
                for (v, rv) in other.iter_mut().zip(&row) {
                    if !rv.is_zero() {
                        *v = v.clone() - f.clone() * rv.clone();
                    }
                }
                other[col] = T::zero();
            }
        }
        self.t = t;
        self.refresh();
        true
    }

    fn nonbasic_value(&self, j: usize) -> T {
        match self.state[j] {
            ColState::AtUpper => self.upper[j].clone().unwrap_or_else(T::zero),
            _ => T::zero(),
        }
    }

    /// Recomputes basic values from the basis inverse and the original rows.
    fn refresh(&mut self) {
        let mut rhs = self.b0.clone();
        for j in 0..self.ncols {
            if self.state[j] == ColState::AtUpper {
                let u = self.nonbasic_value(j);
                for (i, r) in rhs.iter_mut().enumerate() {
                    if !self.a0[i][j].is_zero() {
                        *r = r.clone() - self.a0[i][j].clone() * u.clone();
                    }
                }
            }
        }
        for i in 0..self.m {
            let mut v = T::zero();
            for (k, r) in rhs.iter().enumerate() {
                let binv = &self.t[i][self.first_art + k];
                if !binv.is_zero() {
                    v = v + binv.clone() * r.clone();
                }
            }
            self.beta[i] = v;
        }
    }

    fn column_values(&self) -> Vec<T> {
        let mut y: Vec<T> = (0..self.ncols).map(|j| self.nonbasic_value(j)).collect();
        for i in 0..self.m {
            y[self.basis[i]] = self.beta[i].clone();
        }
        y
    }

    fn primal(&self, maps: &[ColMap<T>]) -> Vec<T> {
        let y = self.column_values();
        maps.iter()
            .map(|map| match map {
                ColMap::Shift { col, lo } => lo.clone() + y[*col].clone(),
                ColMap::Mirror { col, hi } => hi.clone() - y[*col].clone(),
                ColMap::Split { pos, neg } => y[*pos].clone() - y[*neg].clone(),
            })
            .collect()
    }

    /// Primal feasibility of the point and sign conditions of the reduced
    /// costs, recomputed in `f64` from the original data.
    fn certified(&self, program: &LinearProgram<T>, maps: &[ColMap<T>], cost2: &[T], scale_b: f64) -> bool {
        let x = self.primal(maps);
        if program.max_violation(&x).as_f64() > FEASIBILITY_TOL * scale_b * 10.0 {
            return false;
        }
        let internal = self.internal_duals(cost2);
        (0..self.first_art).all(|j| {
            let mut d = cost2[j].as_f64();
            let mut mag = d.abs();
            for (i, yi) in internal.iter().enumerate() {
                let term = yi.as_f64() * self.a0[i][j].as_f64();
                d -= term;
                mag += term.abs();
            }
            let tol = OPTIMALITY_TOL * (1.0 + mag) * 10.0;
            match self.state[j] {
                ColState::Basic => d.abs() <= tol,
                ColState::AtLower => d >= -tol || matches!(&self.upper[j], Some(u) if u.is_zero()),
                ColState::AtUpper => d <= tol,
            }
        })
    }

    /// c_B B⁻¹ for the internal rows.
    fn internal_duals(&self, cost: &[T]) -> Vec<T> {
        (0..self.m)
            .map(|k| {
                (0..self.m).fold(T::zero(), |acc, i| {
                    let cb = &cost[self.basis[i]];
                    if cb.is_zero() {
                        acc
                    } else {
                        acc + cb.clone() * self.t[i][self.first_art + k].clone()
                    }
                })
            })
            .collect()
    }
}

impl<T: LpScalar> LpSolver<T> for DenseSimplex {
    fn solve(&self, program: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
        program.validate()?;
        let n = program.num_vars();
        let m = program.rows.len();

        let mut maps = Vec::with_capacity(n);
        let mut col_upper: Vec<Option<T>> = Vec::new();
        for j in 0..n {
            match (&program.lower[j], &program.upper[j]) {
                (Some(lo), hi) => {
                    maps.push(ColMap::Shift { col: col_upper.len(), lo: lo.clone() });
                    col_upper.push(hi.as_ref().map(|h| h.clone() - lo.clone()));
                }
                (None, Some(hi)) => {
                    maps.push(ColMap::Mirror { col: col_upper.len(), hi: hi.clone() });
                    col_upper.push(None);
                }
                (None, None) => {
                    let pos = col_upper.len();
                    maps.push(ColMap::Split { pos, neg: pos + 1 });
                    col_upper.push(None);
                    col_upper.push(None);
                }
            }
        }
        let nstruct = col_upper.len();
        let nslack = program.rows.iter().filter(|r| r.sense != RowSense::Eq).count();
        let first_art = nstruct + nslack;
        let ncols = first_art + m;

        let sign = match program.objective {
            Objective::Minimize => T::one(),
            Objective::Maximize => -T::one(),
        };
        let mut cost2 = vec![T::zero(); ncols];
        for (j, map) in maps.iter().enumerate() {
            let c = program.cost[j].clone() * sign.clone();
            match map {
                ColMap::Shift { col, .. } => cost2[*col] = c,
                ColMap::Mirror { col, .. } => cost2[*col] = -c,
                ColMap::Split { pos, neg } => {
                    cost2[*pos] = c.clone();
                    cost2[*neg] = -c;
                }
            }
        }

        let mut a0 = vec![vec![T::zero(); ncols]; m];
        let mut b0 = vec![T::zero(); m];
        let mut row_sign = vec![T::one(); m];
        let mut slack = nstruct;
        for (i, row) in program.rows.iter().enumerate() {
            let mut rhs = row.rhs.clone();
            for (j, map) in maps.iter().enumerate() {
                let a = &row.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                match map {
                    ColMap::Shift { col, lo } => {
                        a0[i][*col] = a.clone();
                        rhs = rhs - a.clone() * lo.clone();
                    }
                    ColMap::Mirror { col, hi } => {
                        a0[i][*col] = -a.clone();
                        rhs = rhs - a.clone() * hi.clone();
                    }
                    ColMap::Split { pos, neg } => {
                        a0[i][*pos] = a.clone();
                        a0[i][*neg] = -a.clone();
                    }
                }
            }
            match row.sense {
                RowSense::Le => {
                    a0[i][slack] = T::one();
                    slack += 1;
                }
                RowSense::Ge => {
                    a0[i][slack] = -T::one();
                    slack += 1;
                }
                RowSense::Eq => {}
            }
            if rhs < T::zero() {
                row_sign[i] = -T::one();
                rhs = -rhs;
                for v in a0[i][..first_art].iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
            }
            a0[i][first_art + i] = T::one();
            b0[i] = rhs;
        }

        let mut upper = col_upper;
        upper.extend(std::iter::repeat_n(None, nslack + m));
        let mut state = vec![ColState::AtLower; ncols];
        for i in 0..m {
            state[first_art + i] = ColState::Basic;
        }

        let mut tab = Tableau {
            m,
            ncols,
            first_art,
            t: a0.clone(),
            a0,
            beta: b0.clone(),
            b0,
            basis: (first_art..ncols).collect(),
            state,
            upper,
            iterations: 0,
        };

        // Phase I
        let mut cost1 = vec![T::zero(); ncols];
        for c in cost1[first_art..].iter_mut() {
            *c = T::one();
        }
        match tab.run(&cost1, self.max_iterations) {
            PhaseEnd::IterationLimit => return Ok(failure(LpStatus::IterationLimit, n, m, tab.iterations)),
            PhaseEnd::Unbounded => unreachable!("phase I objective is bounded below by zero"),
            PhaseEnd::Optimal => {}
        }
        tab.refresh();
        let scale_b = tab.b0.iter().fold(T::one(), |acc, b| if b.abs_val() > acc { b.abs_val() } else { acc });
        let infeasibility =
            (0..m).filter(|&i| tab.basis[i] >= first_art).fold(T::zero(), |acc, i| acc + tab.beta[i].abs_val());
        let feas_tol = if T::is_exact() { T::zero() } else { T::from_f64(FEASIBILITY_TOL) * scale_b.clone() };
        if infeasibility > feas_tol {
            return Ok(failure(LpStatus::Infeasible, n, m, tab.iterations));
        }
        for k in 0..m {
            tab.upper[first_art + k] = Some(T::zero());
        }
        for i in 0..m {
            if tab.basis[i] >= first_art {
                tab.beta[i] = T::zero();
            }
        }

        // Phase II, reinverting the basis when the certificate check fails
        let mut attempt = 0;
        loop {
            match tab.run(&cost2, self.max_iterations) {
                PhaseEnd::IterationLimit => return Ok(failure(LpStatus::IterationLimit, n, m, tab.iterations)),
                PhaseEnd::Unbounded => return Ok(failure(LpStatus::Unbounded, n, m, tab.iterations)),
                PhaseEnd::Optimal => {}
            }
            tab.refresh();
            let certified =
                !self.check_certificate || T::is_exact() || tab.certified(program, &maps, &cost2, scale_b.as_f64());
            if certified {
                break;
            }
            attempt += 1;
            if attempt > REINVERSIONS || !tab.reinvert() {
                return Ok(failure(LpStatus::NumericalFailure, n, m, tab.iterations));
            }
        }

        let x = tab.primal(&maps);
        let internal = tab.internal_duals(&cost2);
        let duals: Vec<T> = internal.iter().zip(&row_sign).map(|(d, s)| d.clone() * s.clone() * sign.clone()).collect();
        let value = program.evaluate(&x);

        Ok(LpSolution { status: LpStatus::Optimal, value, x, duals, iterations: tab.iterations })
    }
}

fn failure<T: LpScalar>(status: LpStatus, n: usize, m: usize, iterations: usize) -> LpSolution<T> {
    LpSolution { status, value: T::zero(), x: vec![T::zero(); n], duals: vec![T::zero(); m], iterations }
}
