//! Finite-dimensional C*-algebras as direct sums of full matrix blocks.
//!
//! Self-adjoint elements carry one Hermitian matrix per block. Everything
//! linear (Lip-norm functionals, epimorphisms, states) is expressed in real
//! coordinates with respect to a fixed orthonormal Hermitian basis of each
//! block, ordered as follows for a block of dimension `d`:
//!
//! 1. the `d` diagonal matrix units `E_kk`;
//! 2. for each pair `j < k` in row-major order, the symmetric element
//!    `(E_jk + E_kj)/√2` followed by the antisymmetric element
//!    `(−i E_jk + i E_kj)/√2`.
//!
//! Blocks are concatenated in order, so a commutative algebra `ℂⁿ` has the
//! point values themselves as coordinates. The basis is orthonormal for
//! `⟨a, b⟩ = tr(ab)`, hence coordinates are `x_k = tr(B_k a)`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use std::sync::Arc;

pub type CMatrix = DMatrix<Complex64>;

/// Hermitian residual tolerance, relative to the block's entry scale.
pub const HERMITIAN_TOL: f64 = 1e-12;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    label: String,
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl Algebra {
    pub fn new(label: impl Into<String>, blocks: Vec<usize>) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("at least one block is required".into()));
        }
        if blocks.contains(&0) {
            return Err(Error::InvalidAlgebra("block dimensions must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for &d in &blocks {
            offsets.push(dim);
            dim += d * d;
        }
        Ok(Arc::new(Self { label: label.into(), blocks, offsets, dim }))
    }

    /// `ℂⁿ`: functions on an `n`-point set.
    pub fn commutative(label: impl Into<String>, points: usize) -> Result<Arc<Self>> {
        Self::new(label, vec![1; points])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Real dimension of the self-adjoint part, `Σ dᵢ²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate range of block `b`.
    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b] + self.blocks[b] * self.blocks[b]
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&d| d == 1)
    }

    /// Coordinates of the unit.
    pub fn unit_coords(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.dim];
        for (b, &d) in self.blocks.iter().enumerate() {
            for k in 0..d {
                u[self.offsets[b] + k] = 1.0;
            }
        }
        u
    }

    /// Coordinates of a Hermitian matrix living in block `b`.
    pub fn block_coords(d: usize, m: &CMatrix) -> Vec<f64> {
        let mut x = Vec::with_capacity(d * d);
        for k in 0..d {
            x.push(m[(k, k)].re);
        }
        for j in 0..d {
            for k in j + 1..d {
                // average with the mirrored entry to absorb tiny asymmetry
                let z = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
                x.push(2.0 * SQRT_HALF * z.re);
                x.push(-2.0 * SQRT_HALF * z.im);
            }
        }
        x
    }

    /// Inverse of [`Algebra::block_coords`].
    pub fn block_matrix(d: usize, x: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k, k)] = Complex64::new(x[k], 0.0);
        }
        let mut idx = d;
        for j in 0..d {
            for k in j + 1..d {
                let re = x[idx] * SQRT_HALF;
                let im = -x[idx + 1] * SQRT_HALF;
                m[(j, k)] = Complex64::new(re, im);
                m[(k, j)] = Complex64::new(re, -im);
                idx += 2;
            }
        }
        m
    }

    /// The `k`-th basis element of a block of dimension `d`.
    pub fn basis_matrix(d: usize, k: usize) -> CMatrix {
        let mut x = vec![0.0; d * d];
        x[k] = 1.0;
        Self::block_matrix(d, &x)
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.blocks.iter().map(|&d| if d == 1 { "C".to_string() } else { format!("M{d}") }).collect();
        write!(f, "{} = {}", self.label, parts.join("⊕"))
    }
}

pub(crate) fn hermitian_residual(m: &CMatrix) -> f64 {
    let scale = 1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst / scale
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub(crate) fn hermitian_norm(m: &CMatrix) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].re.abs(),
        _ => m.clone().symmetric_eigenvalues().iter().fold(0.0, |acc, v| acc.max(v.abs())),
    }
}

/// A self-adjoint element: one Hermitian matrix per block.
#[derive(Debug, Clone)]
pub struct SelfAdjointElement {
    algebra: Arc<Algebra>,
    blocks: Vec<CMatrix>,
}

impl SelfAdjointElement {
    pub fn from_blocks(algebra: &Arc<Algebra>, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Dimension(format!("{} blocks given for {}", blocks.len(), algebra)));
        }
        for (b, (m, &d)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("block {b} is not {d}×{d}")));
            }
            let r = hermitian_residual(m);
            if r > HERMITIAN_TOL {
                return Err(Error::NotSelfAdjoint { block: b, residual: r });
            }
        }
        Ok(Self { algebra: algebra.clone(), blocks })
    }

    pub fn from_coords(algebra: &Arc<Algebra>, coords: &[f64]) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::Dimension(format!("{} coordinates given for {}", coords.len(), algebra)));
        }
        let blocks = algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(b, &d)| Algebra::block_matrix(d, &coords[algebra.block_range(b)]))
            .collect();
        Ok(Self { algebra: algebra.clone(), blocks })
    }

    /// Element of a commutative algebra from its point values.
    pub fn from_values(algebra: &Arc<Algebra>, values: &[f64]) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(Error::Dimension(format!("{algebra} has matrix blocks")));
        }
        Self::from_coords(algebra, values)
    }

    pub fn unit(algebra: &Arc<Algebra>) -> Self {
        let blocks = algebra.blocks().iter().map(|&d| CMatrix::identity(d, d)).collect();
        Self { algebra: algebra.clone(), blocks }
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        let blocks = algebra.blocks().iter().map(|&d| CMatrix::zeros(d, d)).collect();
        Self { algebra: algebra.clone(), blocks }
    }

    /// Random element: uniform point values on `ℂ` blocks, entries with
    /// uniform real and imaginary parts in `[-1, 1]` on matrix blocks.
    pub fn random<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Self {
        let coords: Vec<f64> = (0..algebra.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::from_coords(algebra, &coords).expect("dimension matches")
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.algebra.dim());
        for (m, &d) in self.blocks.iter().zip(self.algebra.blocks()) {
            x.extend(Algebra::block_coords(d, m));
        }
        x
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.blocks.iter().map(hermitian_residual).fold(0.0, f64::max)
    }

    /// `‖a‖`: the largest absolute eigenvalue over all blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks.iter().map(hermitian_norm).fold(0.0, f64::max)
    }

    fn same_parent(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch {
                expected: self.algebra.label().to_string(),
                found: other.algebra.label().to_string(),
            });
        }
        Ok(())
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        self.same_parent(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Ok(Self { algebra: self.algebra.clone(), blocks })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn scale(&self, t: f64) -> Self {
        let blocks = self.blocks.iter().map(|m| m * Complex64::new(t, 0.0)).collect();
        Self { algebra: self.algebra.clone(), blocks }
    }

    /// `a ∘ b = (ab + ba)/2`.
    pub fn jordan(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| (a * b + b * a) * Complex64::new(0.5, 0.0))
    }

    /// `{a, b} = (ab − ba)/2i`.
    pub fn lie(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| (a * b - b * a) * Complex64::new(0.0, -0.5))
    }

    /// The associative product `ab`, which is generally not self-adjoint.
    pub fn product_blocks(&self, other: &Self) -> Result<Vec<CMatrix>> {
        self.same_parent(other)?;
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect())
    }
}

/// A unital *-epimorphism in structural form: target block `j` is
/// `U_j · d_{block_map[j]} · U_j*`.
#[derive(Debug, Clone)]
pub struct StarEpimorphism {
    source: Arc<Algebra>,
    target: Arc<Algebra>,
    block_map: Vec<usize>,
    unitaries: Option<Vec<CMatrix>>,
    /// Real `target.dim() × source.dim()` matrix in basis coordinates.
    coord_matrix: DMatrix<f64>,
}

impl PartialEq for StarEpimorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.block_map == other.block_map
            && self.unitaries == other.unitaries
    }
}

impl StarEpimorphism {
    pub fn new(
        source: &Arc<Algebra>,
        target: &Arc<Algebra>,
        block_map: Vec<usize>,
        unitaries: Option<Vec<CMatrix>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidEpimorphism(msg));
        if block_map.len() != target.num_blocks() {
            return bad(format!(
                "block map has {} entries, target {} has {} blocks",
                block_map.len(),
                target.label(),
                target.num_blocks()
            ));
        }
        let mut used = vec![false; source.num_blocks()];
        for (j, &s) in block_map.iter().enumerate() {
            if s >= source.num_blocks() {
                return bad(format!("target block {j} reads missing source block {s}"));
            }
            if source.blocks()[s] != target.blocks()[j] {
                return bad(format!("target block {j} and source block {s} differ in dimension"));
            }
            if used[s] {
                return bad(format!("source block {s} is read twice, map is not surjective"));
            }
            used[s] = true;
        }
        if let Some(us) = &unitaries {
            if us.len() != target.num_blocks() {
                return bad("one unitary per target block is required".into());
            }
            for (j, u) in us.iter().enumerate() {
                let d = target.blocks()[j];
                if u.nrows() != d || u.ncols() != d {
                    return bad(format!("unitary {j} is not {d}×{d}"));
                }
                let defect = (u * u.adjoint() - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if defect > 1e-10 {
                    return bad(format!("matrix {j} is not unitary (defect {defect:.2e})"));
                }
            }
        }
        let mut coord_matrix = DMatrix::zeros(target.dim(), source.dim());
        for (j, &s) in block_map.iter().enumerate() {
            let d = target.blocks()[j];
            let src = source.block_range(s);
            let dst = target.block_range(j);
            match unitaries.as_ref().map(|us| &us[j]) {
                None => {
                    for k in 0..d * d {
                        coord_matrix[(dst.start + k, src.start + k)] = 1.0;
                    }
                }
                Some(u) => {
                    for k in 0..d * d {
                        let image = u * Algebra::basis_matrix(d, k) * u.adjoint();
                        for (r, v) in Algebra::block_coords(d, &image).into_iter().enumerate() {
                            coord_matrix[(dst.start + r, src.start + k)] = v;
                        }
                    }
                }
            }
        }
        Ok(Self { source: source.clone(), target: target.clone(), block_map, unitaries, coord_matrix })
    }

    pub fn identity(algebra: &Arc<Algebra>) -> Self {
        Self::new(algebra, algebra, (0..algebra.num_blocks()).collect(), None)
            .expect("identity map is a valid epimorphism")
    }

    pub fn source(&self) -> &Arc<Algebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Algebra> {
        &self.target
    }

    pub fn block_map(&self) -> &[usize] {
        &self.block_map
    }

    pub fn unitaries(&self) -> Option<&[CMatrix]> {
        self.unitaries.as_deref()
    }

    pub fn coord_matrix(&self) -> &DMatrix<f64> {
        &self.coord_matrix
    }

    pub fn apply(&self, d: &SelfAdjointElement) -> Result<SelfAdjointElement> {
        if d.algebra() != &self.source {
            return Err(Error::AlgebraMismatch {
                expected: self.source.label().to_string(),
                found: d.algebra().label().to_string(),
            });
        }
        let blocks = self
            .block_map
            .iter()
            .enumerate()
            .map(|(j, &s)| match &self.unitaries {
                None => d.blocks()[s].clone(),
                Some(us) => &us[j] * &d.blocks()[s] * us[j].adjoint(),
            })
            .collect();
        Ok(SelfAdjointElement { algebra: self.target.clone(), blocks })
    }

    pub fn apply_coords(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.target.dim()];
        for (j, &s) in self.block_map.iter().enumerate() {
            let src = self.source.block_range(s);
            let dst = self.target.block_range(j);
            if self.unitaries.is_none() {
                y[dst].copy_from_slice(&x[src]);
            } else {
                for r in dst.clone() {
                    y[r] = src.clone().map(|c| self.coord_matrix[(r, c)] * x[c]).sum();
                }
            }
        }
        y
    }

    /// Transpose action on coordinate covectors: `s ↦ s∘π`.
    pub fn pullback_coords(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.source.dim()];
        for (j, &src_block) in self.block_map.iter().enumerate() {
            let src = self.source.block_range(src_block);
            let dst = self.target.block_range(j);
            for c in src {
                out[c] = dst.clone().map(|r| self.coord_matrix[(r, c)] * s[r]).sum();
            }
        }
        out
    }

    /// A preimage of `a` supported on the selected source blocks.
    pub fn lift_coords(&self, a: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.source.dim()];
        for (j, &s) in self.block_map.iter().enumerate() {
            let src = self.source.block_range(s);
            let dst = self.target.block_range(j);
            // coordinate blocks are orthogonal, so the inverse is the transpose
            for c in src {
                x[c] = dst.clone().map(|r| self.coord_matrix[(r, c)] * a[r]).sum();
            }
        }
        x
    }

    /// Coordinates spanning `ker π`: every coordinate of an unread block.
    pub fn kernel_coords(&self) -> Vec<usize> {
        let mut read = vec![false; self.source.num_blocks()];
        for &s in &self.block_map {
            read[s] = true;
        }
        (0..self.source.num_blocks()).filter(|&b| !read[b]).flat_map(|b| self.source.block_range(b)).collect()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &StarEpimorphism) -> Result<StarEpimorphism> {
        if next.source != self.target {
            return Err(Error::AlgebraMismatch {
                expected: self.target.label().to_string(),
                found: next.source.label().to_string(),
            });
        }
        let block_map: Vec<usize> = next.block_map.iter().map(|&j| self.block_map[j]).collect();
        let unitaries = match (&self.unitaries, &next.unitaries) {
            (None, None) => None,
            _ => Some(
                next.block_map
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| {
                        let d = next.target.blocks()[k];
                        let inner = self.unitaries.as_ref().map_or_else(|| CMatrix::identity(d, d), |u| u[j].clone());
                        let outer = next.unitaries.as_ref().map_or_else(|| CMatrix::identity(d, d), |u| u[k].clone());
                        outer * inner
                    })
                    .collect(),
            ),
        };
        StarEpimorphism::new(&self.source, &next.target, block_map, unitaries)
    }
}

/// `A ⊕ B` together with its two coordinate projections.
pub fn direct_sum(a: &Arc<Algebra>, b: &Arc<Algebra>) -> (Arc<Algebra>, StarEpimorphism, StarEpimorphism) {
    let mut blocks = a.blocks().to_vec();
    blocks.extend_from_slice(b.blocks());
    let sum = Algebra::new(format!("({} ⊕ {})", a.label(), b.label()), blocks).expect("summands are valid algebras");
    let na = a.num_blocks();
    let eta1 = StarEpimorphism::new(&sum, a, (0..na).collect(), None).expect("first projection");
    let eta2 = StarEpimorphism::new(&sum, b, (na..na + b.num_blocks()).collect(), None).expect("second projection");
    (sum, eta1, eta2)
}

/// Pauli matrices `σx, σy, σz`.
pub fn pauli() -> [CMatrix; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}
