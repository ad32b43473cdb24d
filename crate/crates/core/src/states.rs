//! States, the Monge-Kantorovich metric, and distances to convex sets of
//! states.
//!
//! A state is stored by its coordinates `s_k = φ(B_k)` in the Hermitian
//! basis, so `φ(a) = s·x` and the density matrix of block `b` is
//! `Σ_k s_k B_k` over that block's range.
//!
//! Suprema over a state space are taken over its extreme points. This is
//! exact for commutative algebras: the distance from a state to a fixed
//! convex set is convex in the state, and the state space is a simplex
//! whose vertices are the Dirac states. Matrix blocks have a continuum of
//! pure states; there we sample and label the result an estimate.

use crate::algebra::{hermitian_residual, Algebra, CMatrix, StarEpimorphism};
use crate::error::{Error, Result};
use crate::lipnorm::{solve_optimal, PolyhedralLipNorm};
use crate::lp::{LinearProgram, Objective, RowSense};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Positivity and normalization tolerance for states.
pub const STATE_TOL: f64 = 1e-12;
/// Default number of sampled pure states per matrix block.
pub const DEFAULT_PURE_SAMPLES: usize = 64;
pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed;

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "exact")]
    Exact,
    /// The operator-norm term was replaced by a finite frame of functionals.
    #[serde(rename = "polyhedral approximation")]
    PolyhedralApproximation,
    /// A supremum over pure states was taken over a finite sample.
    #[serde(rename = "estimate")]
    Estimate,
}

impl Mode {
    pub fn combine(self, other: Mode) -> Mode {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::PolyhedralApproximation => "polyhedral approximation",
            Mode::Estimate => "estimate",
        }
    }
}

/// A number together with its [`Mode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub mode: Mode,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self { value, mode: Mode::Exact }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    algebra: Arc<Algebra>,
    coords: Vec<f64>,
}

impl State {
    /// From per-block density matrices whose traces add up to one.
    pub fn from_blocks(algebra: &Arc<Algebra>, blocks: &[CMatrix]) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::InvalidState(format!(
                "{} blocks given, {} has {}",
                blocks.len(),
                algebra.label(),
                algebra.num_blocks()
            )));
        }
        let mut coords = Vec::with_capacity(algebra.dim());
        let mut trace = 0.0;
        for (b, (m, &d)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::InvalidState(format!("block {b} is not {d}×{d}")));
            }
            if hermitian_residual(m) > STATE_TOL {
                return Err(Error::InvalidState(format!("block {b} is not Hermitian")));
            }
            let min_eig = if d == 1 {
                m[(0, 0)].re
            } else {
                m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
            };
            if min_eig < -STATE_TOL {
                return Err(Error::InvalidState(format!("block {b} has negative eigenvalue {min_eig}")));
            }
            trace += m.trace().re;
            coords.extend(Algebra::block_coords(d, m));
        }
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("total trace is {trace}, not 1")));
        }
        Ok(Self { algebra: algebra.clone(), coords })
    }

    /// Probability vector on a commutative algebra.
    pub fn from_probabilities(algebra: &Arc<Algebra>, p: &[f64]) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(Error::InvalidState(format!("{} has matrix blocks", algebra.label())));
        }
        let blocks: Vec<CMatrix> = p.iter().map(|&v| CMatrix::from_element(1, 1, Complex64::new(v, 0.0))).collect();
        Self::from_blocks(algebra, &blocks)
    }

    /// Point evaluation at a `1×1` block.
    pub fn dirac(algebra: &Arc<Algebra>, block: usize) -> Result<Self> {
        if block >= algebra.num_blocks() || algebra.blocks()[block] != 1 {
            return Err(Error::InvalidState(format!("block {block} of {} is not a point", algebra.label())));
        }
        let mut coords = vec![0.0; algebra.dim()];
        coords[algebra.block_range(block).start] = 1.0;
        Ok(Self { algebra: algebra.clone(), coords })
    }

    /// The vector state `a ↦ ⟨v, a_b v⟩` for a unit vector `v`.
    pub fn vector(algebra: &Arc<Algebra>, block: usize, v: &[Complex64]) -> Result<Self> {
        if block >= algebra.num_blocks() || algebra.blocks()[block] != v.len() {
            return Err(Error::InvalidState(format!("vector does not fit block {block}")));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|z| z / norm));
        let rho = &v * v.adjoint();
        let mut coords = vec![0.0; algebra.dim()];
        let range = algebra.block_range(block);
        coords[range].copy_from_slice(&Algebra::block_coords(v.len(), &rho));
        Ok(Self { algebra: algebra.clone(), coords })
    }

    /// Trusted constructor for coordinates produced by linear maps of states.
    pub(crate) fn from_coords_unchecked(algebra: &Arc<Algebra>, coords: Vec<f64>) -> Self {
        Self { algebra: algebra.clone(), coords }
    }

    /// Convex combination of states on one algebra.
    pub fn mixture(states: &[State], weights: &[f64]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        if states.len() != weights.len() {
            return Err(Error::InvalidState("one weight per state is required".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState("weights must be a probability vector".into()));
        }
        let mut coords = vec![0.0; first.algebra.dim()];
        for (s, &w) in states.iter().zip(weights) {
            if s.algebra != first.algebra {
                return Err(Error::InvalidState("mixed states live on different algebras".into()));
            }
            for (c, v) in coords.iter_mut().zip(&s.coords) {
                *c += w * v;
            }
        }
        Ok(Self { algebra: first.algebra.clone(), coords })
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Density matrix of every block.
    pub fn blocks(&self) -> Vec<CMatrix> {
        self.algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(b, &d)| Algebra::block_matrix(d, &self.coords[self.algebra.block_range(b)]))
            .collect()
    }

    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        self.coords.iter().zip(x).map(|(p, q)| p * q).sum()
    }
}

/// `φ ↦ φ∘π`.
pub fn pullback_state(pi: &StarEpimorphism, phi: &State) -> Result<State> {
    if phi.algebra() != pi.target() {
        return Err(Error::AlgebraMismatch {
            expected: pi.target().label().to_string(),
            found: phi.algebra().label().to_string(),
        });
    }
    Ok(State::from_coords_unchecked(pi.source(), pi.pullback_coords(phi.coords())))
}

/// Convex hull of finitely many states.
#[derive(Debug, Clone)]
pub struct ConvexStateSet {
    generators: Vec<State>,
}

impl ConvexStateSet {
    pub fn new(generators: Vec<State>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidState("empty convex set".into()))?;
        if generators.iter().any(|g| g.algebra() != first.algebra()) {
            return Err(Error::InvalidState("generators live on different algebras".into()));
        }
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[State] {
        &self.generators
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        self.generators[0].algebra()
    }
}

fn check_parent(l: &PolyhedralLipNorm, s: &State) -> Result<()> {
    if s.algebra() != l.algebra() {
        return Err(Error::AlgebraMismatch {
            expected: l.algebra().label().to_string(),
            found: s.algebra().label().to_string(),
        });
    }
    Ok(())
}

/// `mk_L(φ, ψ) = sup { (φ − ψ)(a) : L(a) ≤ 1 }`.
///
/// Primal form: variables `x` (free) and `r_i = ℓᵢ(x) ∈ [−1, 1]`, with the
/// trace gauge `1·x = 0` removing the constants.
pub fn mk_distance(l: &PolyhedralLipNorm, phi: &State, psi: &State) -> Result<f64> {
    check_parent(l, phi)?;
    check_parent(l, psi)?;
    mk_distance_coords(l, phi.coords(), psi.coords())
}

pub(crate) fn mk_distance_coords(l: &PolyhedralLipNorm, phi: &[f64], psi: &[f64]) -> Result<f64> {
    let n = l.algebra().dim();
    let m = l.functionals().len();
    let diff: Vec<f64> = phi.iter().zip(psi).map(|(p, q)| p - q).collect();
    if diff.iter().all(|v| v.abs() < 1e-15) {
        return Ok(0.0);
    }
    let mut program = LinearProgram::new(n + m, Objective::Maximize);
    for j in 0..n {
        program.set_free(j);
        program.set_cost(j, diff[j]);
    }
    for i in 0..m {
        program.set_bounds(n + i, Some(-1.0), Some(1.0));
        let mut entries: Vec<(usize, f64)> =
            l.functionals()[i].iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
        entries.push((n + i, -1.0));
        program.add_sparse_row(&entries, RowSense::Eq, 0.0);
    }
    program.add_row(
        l.algebra().unit_coords().into_iter().chain(std::iter::repeat(0.0).take(m)).collect(),
        RowSense::Eq,
        0.0,
    );
    let sol = solve_optimal(&program)?;
    Ok(sol.value.max(0.0))
}

/// `min { mk_L(φ, ψ) : ψ ∈ K }` as one LP in Kantorovich dual form:
/// minimize `Σ (y⁺ + y⁻)` subject to `Gᵀ(y⁺ − y⁻) + Σ_g λ_g s_g = s_φ`,
/// `Σ λ = 1`, all variables nonnegative.
pub fn dist_to_convex_set(l: &PolyhedralLipNorm, phi: &State, k: &ConvexStateSet) -> Result<f64> {
    check_parent(l, phi)?;
    for g in k.generators() {
        check_parent(l, g)?;
    }
    let gens: Vec<&[f64]> = k.generators().iter().map(|g| g.coords()).collect();
    dist_to_hull_coords(l, phi.coords(), &gens)
}

pub(crate) fn dist_to_hull_coords(l: &PolyhedralLipNorm, phi: &[f64], gens: &[&[f64]]) -> Result<f64> {
    if gens.iter().any(|g| g.iter().zip(phi).all(|(p, q)| (p - q).abs() < 1e-15)) {
        return Ok(0.0);
    }
    let n = l.algebra().dim();
    let m = l.functionals().len();
    let ng = gens.len();
    let mut program = LinearProgram::new(2 * m + ng, Objective::Minimize);
    for i in 0..2 * m {
        program.set_cost(i, 1.0);
    }
    for j in 0..n {
        let mut entries = Vec::new();
        for (i, f) in l.functionals().iter().enumerate() {
            if f[j] != 0.0 {
                entries.push((i, f[j]));
                entries.push((m + i, -f[j]));
            }
        }
        for (g, s) in gens.iter().enumerate() {
            if s[j] != 0.0 {
                entries.push((2 * m + g, s[j]));
            }
        }
        program.add_sparse_row(&entries, RowSense::Eq, phi[j]);
    }
    let ones: Vec<(usize, f64)> = (0..ng).map(|g| (2 * m + g, 1.0)).collect();
    program.add_sparse_row(&ones, RowSense::Eq, 1.0);
    let sol = solve_optimal(&program)?;
    Ok(sol.value.max(0.0))
}

/// Extreme states of an algebra, or a deterministic sample of pure states
/// when a block has dimension at least two.
#[derive(Debug, Clone)]
pub struct ExtremeStates {
    pub states: Vec<State>,
    pub mode: Mode,
}

pub fn extreme_states(algebra: &Arc<Algebra>) -> ExtremeStates {
    extreme_states_sampled(algebra, DEFAULT_PURE_SAMPLES, DEFAULT_SAMPLE_SEED)
}

/// Per matrix block of dimension `d`: the `d²` frame vectors `e_k`,
/// `(e_j ± e_k)/√2`, `(e_j ± i e_k)/√2` first (truncated to the sample
/// size), then Gaussian random unit vectors from a seeded generator.
pub fn extreme_states_sampled(algebra: &Arc<Algebra>, per_block: usize, seed: u64) -> ExtremeStates {
    let mut states = Vec::new();
    let mut mode = Mode::Exact;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (b, &d) in algebra.blocks().iter().enumerate() {
        if d == 1 {
            states.push(State::dirac(algebra, b).expect("point block"));
            continue;
        }
        mode = Mode::Estimate;
        let mut vectors = frame_vectors(d);
        vectors.truncate(per_block);
        while vectors.len() < per_block {
            vectors.push(random_unit_vector(d, &mut rng));
        }
        for v in vectors {
            states.push(State::vector(algebra, b, &v).expect("unit vector"));
        }
    }
    ExtremeStates { states, mode }
}

/// `e_k`, then `(e_j + e_k)/√2, (e_j − e_k)/√2, (e_j + i e_k)/√2,
/// (e_j − i e_k)/√2` for `j < k`.
pub fn frame_vectors(d: usize) -> Vec<Vec<Complex64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for k in 0..d {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        out.push(v);
    }
    for j in 0..d {
        for k in j + 1..d {
            for w in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)]
            {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[j] = Complex64::new(h, 0.0);
                v[k] = w;
                out.push(v);
            }
        }
    }
    out
}

pub fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..d).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `diam(S(A), mk_L)` as the largest distance between extreme states.
pub fn state_diameter(l: &PolyhedralLipNorm) -> Result<Quantity> {
    let ext = extreme_states(l.algebra());
    let mut best: f64 = 0.0;
    for (i, p) in ext.states.iter().enumerate() {
        for q in &ext.states[i + 1..] {
            best = best.max(mk_distance(l, p, q)?);
        }
    }
    Ok(Quantity { value: best, mode: ext.mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::direct_sum;

    fn segment() -> PolyhedralLipNorm {
        let a = Algebra::commutative("X2", 2).unwrap();
        PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0]]).unwrap()
    }

    fn triangle() -> PolyhedralLipNorm {
        let a = Algebra::commutative("T3", 3).unwrap();
        PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0, 0.0], vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0]]).unwrap()
    }

    #[test]
    fn mk_on_two_points() {
        let l = segment();
        let a = l.algebra().clone();
        let p = State::dirac(&a, 0).unwrap();
        let q = State::dirac(&a, 1).unwrap();
        assert_eq!(mk_distance(&l, &p, &p).unwrap(), 0.0);
        assert!((mk_distance(&l, &p, &q).unwrap() - 1.0).abs() < 1e-12);
        let mid = State::from_probabilities(&a, &[0.5, 0.5]).unwrap();
        assert!((mk_distance(&l, &p, &mid).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn state_validation() {
        let a = Algebra::commutative("C2", 2).unwrap();
        assert!(State::from_probabilities(&a, &[0.7, 0.7]).is_err());
        assert!(State::from_probabilities(&a, &[1.5, -0.5]).is_err());
        assert!(State::dirac(&Algebra::new("M2", vec![2]).unwrap(), 0).is_err());
    }

    #[test]
    fn pullbacks() {
        let a = Algebra::commutative("C3", 3).unwrap();
        let pi = StarEpimorphism::new(&a, &a, vec![2, 0, 1], None).unwrap();
        let phi = State::from_probabilities(&a, &[0.5, 0.3, 0.2]).unwrap();
        let back = pullback_state(&pi, &phi).unwrap();
        // φ∘π(x) = φ(x₂, x₀, x₁)
        assert_eq!(back.coords(), &[0.3, 0.2, 0.5]);
        assert_eq!(pullback_state(&StarEpimorphism::identity(&a), &phi).unwrap(), phi);

        let b = Algebra::commutative("C1", 1).unwrap();
        let (_, eta1, _) = direct_sum(&a, &b);
        assert_eq!(pullback_state(&eta1, &phi).unwrap().coords(), &[0.5, 0.3, 0.2, 0.0]);
    }

    #[test]
    fn diameters() {
        let one = Algebra::commutative("X1", 1).unwrap();
        let l1 = PolyhedralLipNorm::new(&one, vec![]).unwrap();
        assert_eq!(state_diameter(&l1).unwrap().value, 0.0);
        assert!((state_diameter(&segment()).unwrap().value - 1.0).abs() < 1e-12);
        let d = state_diameter(&triangle()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12 && d.mode == Mode::Exact);
    }

    #[test]
    fn convex_set_distances() {
        let l = segment();
        let a = l.algebra().clone();
        let p = State::dirac(&a, 0).unwrap();
        let q = State::dirac(&a, 1).unwrap();
        let all = ConvexStateSet::new(vec![p.clone(), q.clone()]).unwrap();
        let mid = State::from_probabilities(&a, &[0.3, 0.7]).unwrap();
        assert!(dist_to_convex_set(&l, &mid, &all).unwrap() < 1e-12);
        assert_eq!(dist_to_convex_set(&l, &p, &all).unwrap(), 0.0);
        let single = ConvexStateSet::new(vec![q.clone()]).unwrap();
        let via_hull = dist_to_convex_set(&l, &mid, &single).unwrap();
        assert!((via_hull - mk_distance(&l, &mid, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pure_state_sample_on_m2() {
        let m = Algebra::new("M2", vec![2]).unwrap();
        let ext = extreme_states_sampled(&m, 100, 9);
        assert_eq!(ext.states.len(), 100);
        assert_eq!(ext.mode, Mode::Estimate);
        for s in &ext.states {
            let rho = &s.blocks()[0];
            let defect = (rho * rho - rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(defect < 1e-10 && (rho.trace().re - 1.0).abs() < 1e-10);
        }
        assert_eq!(extreme_states(&Algebra::commutative("C3", 3).unwrap()).states.len(), 3);
    }
}
