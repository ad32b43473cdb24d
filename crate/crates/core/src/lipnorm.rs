//! Polyhedral Lip-norms `L(a) = maxᵢ |ℓᵢ(a)|` on self-adjoint parts.
//!
//! At finite dimension the condition that the Monge-Kantorovich metric
//! metrizes the weak* topology reduces to the joint kernel of the
//! functionals being exactly `ℝ·1`: the state space is compact, and
//! `mk_L` is a finite metric (hence topology-compatible on a
//! finite-dimensional compact set) precisely when `{L ≤ 1}` is bounded
//! modulo constants.

use crate::algebra::{Algebra, SelfAdjointElement, StarEpimorphism};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpSolution, LpStatus, Objective, RowSense};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Tolerance for `ℓᵢ(1) = 0`, relative to `‖ℓᵢ‖₁`.
pub const UNIT_TOL: f64 = 1e-9;
/// Leibniz check verdict threshold.
pub const LEIBNIZ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralLipNorm {
    algebra: Arc<Algebra>,
    functionals: Vec<Vec<f64>>,
}

impl PolyhedralLipNorm {
    /// Rejects functionals of the wrong length, non-finite entries, and any
    /// functional that does not annihilate the unit.
    pub fn new(algebra: &Arc<Algebra>, functionals: Vec<Vec<f64>>) -> Result<Self> {
        let unit = algebra.unit_coords();
        for (i, f) in functionals.iter().enumerate() {
            if f.len() != algebra.dim() {
                return Err(Error::InvalidLipNorm(format!(
                    "functional {i} has {} coordinates, {} expects {}",
                    f.len(),
                    algebra.label(),
                    algebra.dim()
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidLipNorm(format!("functional {i} is not finite")));
            }
            let at_unit: f64 = f.iter().zip(&unit).map(|(p, q)| p * q).sum();
            let scale: f64 = f.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if at_unit.abs() > UNIT_TOL * scale {
                return Err(Error::InvalidLipNorm(format!(
                    "functional {i} does not vanish on the unit (value {at_unit})"
                )));
            }
        }
        Ok(Self { algebra: algebra.clone(), functionals })
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn functionals(&self) -> &[Vec<f64>] {
        &self.functionals
    }

    pub fn eval(&self, a: &SelfAdjointElement) -> Result<f64> {
        if a.algebra() != &self.algebra {
            return Err(Error::AlgebraMismatch {
                expected: self.algebra.label().to_string(),
                found: a.algebra().label().to_string(),
            });
        }
        Ok(self.eval_coords(&a.coords()))
    }

    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        self.functionals.iter().map(|f| f.iter().zip(x).map(|(p, q)| p * q).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// `t·L`, used for distorted negative controls.
    pub fn scaled(&self, t: f64) -> Self {
        let functionals = self.functionals.iter().map(|f| f.iter().map(|v| v * t).collect()).collect();
        Self { algebra: self.algebra.clone(), functionals }
    }

    /// Functionals as a dense `m × n` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.algebra.dim();
        DMatrix::from_fn(self.functionals.len(), n, |i, j| self.functionals[i][j])
    }
}

/// Programs up to this many coefficients are re-solved over the rationals
/// when the floating-point certificate fails.
const EXACT_FALLBACK_SIZE: usize = 20_000;

pub(crate) fn solve_optimal(program: &LinearProgram<f64>) -> Result<LpSolution<f64>> {
    let sol = lp::solve(program)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::NumericalFailure if program.num_vars() * program.rows.len() <= EXACT_FALLBACK_SIZE => {
            let exact = lp::solve(&program.to_rational())?;
            match exact.status {
                LpStatus::Optimal => Ok(exact.to_f64()),
                other => Err(Error::Lp(format!("{other:?}"))),
            }
        }
        other => Err(Error::Lp(format!("{other:?}"))),
    }
}

/// `inf { L_D(d) : π(d) = a }` by linear programming over the fiber
/// `lift(a) + ker π`.
pub fn quotient_lipnorm(l: &PolyhedralLipNorm, pi: &StarEpimorphism, a: &SelfAdjointElement) -> Result<f64> {
    if pi.source() != l.algebra() {
        return Err(Error::AlgebraMismatch {
            expected: l.algebra().label().to_string(),
            found: pi.source().label().to_string(),
        });
    }
    if a.algebra() != pi.target() {
        return Err(Error::AlgebraMismatch {
            expected: pi.target().label().to_string(),
            found: a.algebra().label().to_string(),
        });
    }
    quotient_lipnorm_coords(l, pi, &a.coords())
}

pub fn quotient_lipnorm_coords(l: &PolyhedralLipNorm, pi: &StarEpimorphism, a: &[f64]) -> Result<f64> {
    let lift = pi.lift_coords(a);
    let kernel = pi.kernel_coords();
    if kernel.is_empty() {
        return Ok(l.eval_coords(&lift));
    }
    // variables: z (kernel coordinates, free), then t ≥ 0
    let k = kernel.len();
    let mut program = LinearProgram::new(k + 1, Objective::Minimize);
    for j in 0..k {
        program.set_free(j);
    }
    program.set_cost(k, 1.0);
    for f in l.functionals() {
        let offset: f64 = f.iter().zip(&lift).map(|(p, q)| p * q).sum();
        let mut entries: Vec<(usize, f64)> =
            kernel.iter().enumerate().filter(|(_, &c)| f[c] != 0.0).map(|(j, &c)| (j, f[c])).collect();
        if entries.is_empty() {
            // the row does not see the kernel: it is a plain lower bound on t
            program.add_sparse_row(&[(k, 1.0)], RowSense::Ge, offset.abs());
            continue;
        }
        entries.push((k, -1.0));
        program.add_sparse_row(&entries, RowSense::Le, -offset);
        entries.last_mut().unwrap().1 = 1.0;
        program.add_sparse_row(&entries, RowSense::Ge, -offset);
    }
    let sol = solve_optimal(&program)?;
    Ok(sol.value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Product {
    Jordan,
    Lie,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LeibnizReport {
    pub trials: usize,
    pub seed: u64,
    /// Largest `L(a ⋆ b) − (‖a‖L(b) + ‖b‖L(a))` seen, over both products.
    pub max_violation: f64,
    /// Coordinates of the worst pair and the product it was seen on.
    pub witness: Option<(Vec<f64>, Vec<f64>, Product)>,
    pub passed: bool,
}

/// Falsification suite for the Leibniz inequalities on `trials` random
/// pairs. Half the samples get a random multiple of the unit added, since
/// the inequality is not invariant under such shifts.
pub fn check_leibniz(l: &PolyhedralLipNorm, trials: usize, seed: u64) -> LeibnizReport {
    use rand::Rng;
    let alg = l.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = SelfAdjointElement::unit(alg);
    let commutative = alg.is_commutative();
    let sample = |rng: &mut ChaCha8Rng| {
        let a = SelfAdjointElement::random(alg, rng);
        if rng.gen_bool(0.5) {
            a.add(&unit.scale(rng.gen_range(-2.0..2.0))).expect("same algebra")
        } else {
            a
        }
    };
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..trials.max(1) {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let (na, nb) = (a.operator_norm(), b.operator_norm());
        let (la, lb) = (l.eval_coords(&a.coords()), l.eval_coords(&b.coords()));
        let bound = na * lb + nb * la;
        let mut products = vec![(Product::Jordan, a.jordan(&b).expect("same algebra"))];
        if !commutative {
            products.push((Product::Lie, a.lie(&b).expect("same algebra")));
        }
        for (kind, p) in products {
            let v = l.eval_coords(&p.coords()) - bound;
            if v > worst {
                worst = v;
                witness = Some((a.coords(), b.coords(), kind));
            }
        }
    }
    LeibnizReport { trials: trials.max(1), seed, max_violation: worst, witness, passed: worst <= LEIBNIZ_TOL }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AxiomReport {
    /// Largest `|ℓᵢ(1)|`.
    pub unit_residual: f64,
    pub rank: usize,
    pub expected_rank: usize,
    /// `{L ≤ 1} ∩ {trace-zero}` is bounded along every coordinate.
    pub bounded: bool,
    pub passed: bool,
}

pub fn check_lipnorm_axioms(l: &PolyhedralLipNorm) -> AxiomReport {
    let alg = l.algebra();
    let n = alg.dim();
    let unit = alg.unit_coords();
    let unit_residual =
        l.functionals().iter().map(|f| f.iter().zip(&unit).map(|(p, q)| p * q).sum::<f64>().abs()).fold(0.0, f64::max);
    let rank = if l.functionals().is_empty() {
        0
    } else {
        let g = l.matrix();
        let svd = g.svd(false, false);
        let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        svd.singular_values.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count()
    };
    let expected_rank = n - 1;
    let bounded = rank == expected_rank && unit_ball_bounded(l);
    AxiomReport {
        unit_residual,
        rank,
        expected_rank,
        bounded,
        passed: unit_residual <= UNIT_TOL && rank == expected_rank && bounded,
    }
}

/// Largest number of linear solves [`unit_ball_vertices`] will attempt.
pub const VERTEX_BUDGET: usize = 1 << 18;

/// `sup { c·x : L(x) ≤ 1, u·x = 0 }` with a maximizer. Finite when `c`
/// annihilates the unit.
pub fn maximize_on_unit_ball(l: &PolyhedralLipNorm, c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let alg = l.algebra();
    let n = alg.dim();
    let mut program = LinearProgram::new(n, Objective::Maximize);
    for j in 0..n {
        program.set_free(j);
        program.set_cost(j, c[j]);
    }
    for f in l.functionals() {
        program.add_row(f.clone(), RowSense::Le, 1.0);
        program.add_row(f.clone(), RowSense::Ge, -1.0);
    }
    program.add_row(alg.unit_coords(), RowSense::Eq, 0.0);
    let sol = solve_optimal(&program)?;
    Ok((sol.value, sol.x))
}

/// Vertices of the polytope `{L ≤ 1} ∩ {u·x = 0}`, or `None` when the
/// enumeration would take more than `budget` solves. Every vertex solves
/// `ℓᵢ(x) = ±1` for `n − 1` independent rows together with `u·x = 0`.
pub fn unit_ball_vertices(l: &PolyhedralLipNorm, budget: usize) -> Option<Vec<Vec<f64>>> {
    let alg = l.algebra();
    let n = alg.dim();
    let unit = alg.unit_coords();
    let rows: Vec<&Vec<f64>> = {
        let mut kept: Vec<&Vec<f64>> = Vec::new();
        for f in l.functionals() {
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let dup = kept.iter().any(|k| {
                let kn = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                let dot: f64 = k.iter().zip(f).map(|(a, b)| a * b).sum();
                (dot.abs() - kn * norm).abs() < 1e-12 * kn * norm && (kn - norm).abs() < 1e-12 * norm
            });
            if !dup {
                kept.push(f);
            }
        }
        kept
    };
    if n == 1 {
        return Some(vec![vec![0.0]]);
    }
    let k = n - 1;
    if rows.len() < k {
        return None;
    }
    // C(m, k) subsets with 2^k sign patterns each
    let mut subsets: f64 = 1.0;
    for i in 0..k {
        subsets *= (rows.len() - i) as f64 / (i + 1) as f64;
    }
    if k >= 60 || subsets * 2f64.powi(k as i32) > budget as f64 {
        return None;
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (r, &i) in idx.iter().enumerate() {
            for c in 0..n {
                m[(r, c)] = rows[i][c];
            }
        }
        for c in 0..n {
            m[(k, c)] = unit[c];
        }
        if let Some(inv) = m.try_inverse() {
            for signs in 0u64..(1u64 << k) {
                let x: Vec<f64> = (0..n)
                    .map(|c| (0..k).map(|r| if signs >> r & 1 == 1 { -inv[(c, r)] } else { inv[(c, r)] }).sum())
                    .collect();
                let feasible =
                    rows.iter().all(|f| f.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs() <= 1.0 + 1e-9);
                if feasible && !out.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9)) {
                    out.push(x);
                }
            }
        }
        // next k-subset of the rows
        let mut p = k;
        loop {
            if p == 0 {
                return Some(out);
            }
            p -= 1;
            if idx[p] < rows.len() - k + p {
                idx[p] += 1;
                for t in p + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Maximizes `±x_k` over `{|ℓᵢ(x)| ≤ 1, u·x = 0}` for every coordinate.
fn unit_ball_bounded(l: &PolyhedralLipNorm) -> bool {
    let alg = l.algebra();
    let n = alg.dim();
    let mut base = LinearProgram::new(n, Objective::Maximize);
    for j in 0..n {
        base.set_free(j);
    }
    for f in l.functionals() {
        base.add_row(f.clone(), RowSense::Le, 1.0);
        base.add_row(f.clone(), RowSense::Ge, -1.0);
    }
    base.add_row(alg.unit_coords(), RowSense::Eq, 0.0);
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut p = base.clone();
            p.set_cost(k, sign);
            match lp::solve(&p) {
                Ok(sol) if sol.is_optimal() => {}
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::direct_sum;

    fn two_point() -> PolyhedralLipNorm {
        let a = Algebra::commutative("X2", 2).unwrap();
        PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let l = two_point();
        let alg = l.algebra().clone();
        let a = SelfAdjointElement::from_values(&alg, &[3.0, 1.0]).unwrap();
        assert_eq!(l.eval(&a).unwrap(), 2.0);
        assert_eq!(l.eval(&SelfAdjointElement::unit(&alg)).unwrap(), 0.0);
        let shifted = a.add(&SelfAdjointElement::unit(&alg).scale(7.5)).unwrap();
        assert_eq!(l.eval(&shifted).unwrap(), 2.0);
    }

    #[test]
    fn rejects_functional_seeing_the_unit() {
        let a = Algebra::commutative("C2", 2).unwrap();
        assert!(PolyhedralLipNorm::new(&a, vec![vec![1.0, -2.0]]).is_err());
        assert!(PolyhedralLipNorm::new(&a, vec![vec![1.0]]).is_err());
    }

    #[test]
    fn quotient_through_identity_and_unit() {
        let l = two_point();
        let alg = l.algebra().clone();
        let id = StarEpimorphism::identity(&alg);
        let a = SelfAdjointElement::from_values(&alg, &[0.25, -1.0]).unwrap();
        assert_eq!(quotient_lipnorm(&l, &id, &a).unwrap(), l.eval(&a).unwrap());
        assert_eq!(quotient_lipnorm(&l, &id, &SelfAdjointElement::unit(&alg)).unwrap(), 0.0);
    }

    #[test]
    fn quotient_of_bridge_seminorm_recovers_summand() {
        let l = two_point();
        let alg = l.algebra().clone();
        let (d, eta1, eta2) = direct_sum(&alg, &alg);
        let eps = 0.25;
        let mut fs = Vec::new();
        fs.push(vec![1.0, -1.0, 0.0, 0.0]);
        fs.push(vec![0.0, 0.0, 1.0, -1.0]);
        // (1/ε)·max_x |d₁(x) − d₂(x)|
        fs.push(vec![1.0 / eps, 0.0, -1.0 / eps, 0.0]);
        fs.push(vec![0.0, 1.0 / eps, 0.0, -1.0 / eps]);
        let big = PolyhedralLipNorm::new(&d, fs).unwrap();
        let a = SelfAdjointElement::from_values(&alg, &[2.0, -1.0]).unwrap();
        assert!((quotient_lipnorm(&big, &eta1, &a).unwrap() - 3.0).abs() < 1e-9);
        assert!((quotient_lipnorm(&big, &eta2, &a).unwrap() - 3.0).abs() < 1e-9);
        assert!(quotient_lipnorm(&big, &eta1, &SelfAdjointElement::unit(&alg)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lipschitz_seminorm_is_leibniz() {
        let a = Algebra::commutative("X3", 3).unwrap();
        let l =
            PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0], vec![0.5, 0.0, -0.5]]).unwrap();
        let report = check_leibniz(&l, 10_000, 1);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn axiom_checks() {
        let l = two_point();
        assert!(check_lipnorm_axioms(&l).passed);
        let a = Algebra::commutative("C3", 3).unwrap();
        let zero = PolyhedralLipNorm::new(&a, vec![vec![0.0; 3]]).unwrap();
        let r = check_lipnorm_axioms(&zero);
        assert!(!r.passed);
        assert_eq!(r.rank, 0);
        let full = PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0, 0.0], vec![1.0, 1.0, -2.0]]).unwrap();
        let r = check_lipnorm_axioms(&full);
        assert!(r.passed && r.rank == 2);
        let short = PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0, 0.0]]).unwrap();
        assert!(!check_lipnorm_axioms(&short).passed);
    }
}
