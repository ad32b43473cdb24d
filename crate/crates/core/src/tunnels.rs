//! Tunnels between Lip-normed algebras, their reach, depth, length and
//! extent, bridge tunnels and the ε-composition.
//!
//! A Lip-normed space is represented by its [`PolyhedralLipNorm`], which
//! carries its algebra.
//!
//! The mismatch term `(1/ε)‖p(d₁) − q(d₂)‖` on a common algebra `C` is
//! written as functionals: one point evaluation per `1×1` block of `C`
//! (exact), and `X ↦ ⟨v, X v⟩` over a fixed frame of unit vectors on each
//! matrix block. The frame contains `e_k`, `(e_j ± e_k)/√2`,
//! `(e_j ± i e_k)/√2` and `2d²` Gaussian unit vectors from
//! [`FRAME_SEED`]. Since `‖X‖ = sup_v |⟨v, X v⟩|`, the frame gives a lower
//! bound of the operator norm, and such tunnels are tagged
//! [`Mode::PolyhedralApproximation`].

use crate::algebra::{direct_sum, Algebra, SelfAdjointElement, StarEpimorphism};
use crate::error::{Error, Result};
use crate::lipnorm::{
    check_lipnorm_axioms, maximize_on_unit_ball, quotient_lipnorm_coords, unit_ball_vertices, AxiomReport,
    PolyhedralLipNorm, VERTEX_BUDGET,
};
use crate::states::{
    dist_to_hull_coords, extreme_states, frame_vectors, pullback_state, random_unit_vector, Mode, State,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Quotient-condition tolerance.
pub const TUNNEL_TOL: f64 = 1e-7;
/// Seed of the random part of the operator-norm frame.
pub const FRAME_SEED: u64 = 0xf4a3e;
/// Random elements added to the basis when validating quotients.
pub const DEFAULT_SPANNING_EXTRA: usize = 20;
pub const SPANNING_SEED: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Identity,
    Bridge,
    Compose,
    Custom,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Identity => "identity",
            Provenance::Bridge => "bridge",
            Provenance::Compose => "compose",
            Provenance::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tunnel {
    lipnorm: PolyhedralLipNorm,
    leg_a: StarEpimorphism,
    leg_b: StarEpimorphism,
    end_a: PolyhedralLipNorm,
    end_b: PolyhedralLipNorm,
    provenance: Provenance,
    epsilon: Option<f64>,
    mode: Mode,
}

impl PartialEq for Tunnel {
    fn eq(&self, other: &Self) -> bool {
        self.lipnorm == other.lipnorm
            && self.leg_a == other.leg_a
            && self.leg_b == other.leg_b
            && self.end_a == other.end_a
            && self.end_b == other.end_b
    }
}

impl Tunnel {
    /// Structural checks only; the quotient conditions are checked by
    /// [`validate_tunnel`].
    pub fn new(
        lipnorm: PolyhedralLipNorm,
        leg_a: StarEpimorphism,
        leg_b: StarEpimorphism,
        end_a: PolyhedralLipNorm,
        end_b: PolyhedralLipNorm,
        provenance: Provenance,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        let d = lipnorm.algebra();
        for (name, leg, end) in [("A", &leg_a, &end_a), ("B", &leg_b, &end_b)] {
            if leg.source() != d {
                return Err(Error::InvalidTunnel(format!("leg {name} does not start at {}", d.label())));
            }
            if leg.target() != end.algebra() {
                return Err(Error::InvalidTunnel(format!(
                    "leg {name} lands in {} but the endpoint is {}",
                    leg.target().label(),
                    end.algebra().label()
                )));
            }
        }
        let mode = if d.is_commutative() { Mode::Exact } else { Mode::PolyhedralApproximation };
        Ok(Self { lipnorm, leg_a, leg_b, end_a, end_b, provenance, epsilon, mode })
    }

    pub(crate) fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        self.lipnorm.algebra()
    }

    pub fn lipnorm(&self) -> &PolyhedralLipNorm {
        &self.lipnorm
    }

    pub fn leg_a(&self) -> &StarEpimorphism {
        &self.leg_a
    }

    pub fn leg_b(&self) -> &StarEpimorphism {
        &self.leg_b
    }

    pub fn end_a(&self) -> &PolyhedralLipNorm {
        &self.end_a
    }

    pub fn end_b(&self) -> &PolyhedralLipNorm {
        &self.end_b
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// `Exact` unless a matrix-block mismatch term was linearized.
    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// `(A, L_A, id, id)`.
pub fn identity_tunnel(l: &PolyhedralLipNorm) -> Tunnel {
    let id = StarEpimorphism::identity(l.algebra());
    Tunnel::new(l.clone(), id.clone(), id, l.clone(), l.clone(), Provenance::Identity, None)
        .expect("identity legs fit")
        .with_mode(Mode::Exact)
}

/// `(A, L_A, id, h)` for an isomorphism `h : A → B` with `L_B∘h = L_A`.
pub fn isometry_tunnel(l_a: &PolyhedralLipNorm, h: &StarEpimorphism, l_b: &PolyhedralLipNorm) -> Result<Tunnel> {
    if !h.kernel_coords().is_empty() || h.source().dim() != h.target().dim() {
        return Err(Error::InvalidTunnel("an isometry tunnel needs an isomorphism".into()));
    }
    let id = StarEpimorphism::identity(l_a.algebra());
    let t = Tunnel::new(l_a.clone(), id, h.clone(), l_a.clone(), l_b.clone(), Provenance::Identity, None)?
        .with_mode(Mode::Exact);
    let report = validate_tunnel(&t, DEFAULT_SPANNING_EXTRA);
    if !report.passed {
        return Err(Error::InvalidTunnel(format!("isomorphism is not isometric (gap {:.3e})", report.max_gap())));
    }
    Ok(t)
}

/// Swaps the two legs and endpoints.
pub fn reverse_tunnel(t: &Tunnel) -> Tunnel {
    Tunnel {
        lipnorm: t.lipnorm.clone(),
        leg_a: t.leg_b.clone(),
        leg_b: t.leg_a.clone(),
        end_a: t.end_b.clone(),
        end_b: t.end_a.clone(),
        provenance: t.provenance,
        epsilon: t.epsilon,
        mode: t.mode,
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Coordinate functionals on `C` whose maximal absolute value is (or, on
/// matrix blocks, approximates from below) the operator norm.
pub fn norm_frame(c: &Arc<Algebra>) -> (Vec<Vec<f64>>, Mode) {
    let mut rng = ChaCha8Rng::seed_from_u64(FRAME_SEED);
    let mut out = Vec::new();
    let mut mode = Mode::Exact;
    for (b, &d) in c.blocks().iter().enumerate() {
        if d == 1 {
            let mut f = vec![0.0; c.dim()];
            f[c.block_range(b).start] = 1.0;
            out.push(f);
            continue;
        }
        mode = Mode::PolyhedralApproximation;
        let mut vectors = frame_vectors(d);
        for _ in 0..2 * d * d {
            vectors.push(random_unit_vector(d, &mut rng));
        }
        for v in vectors {
            out.push(State::vector(c, b, &v).expect("unit vector").coords().to_vec());
        }
    }
    (out, mode)
}

/// The seminorm `N(d₁, d₂) = (1/ε)‖p(d₁) − q(d₂)‖` through two
/// epimorphisms onto a common algebra.
#[derive(Debug, Clone)]
pub struct BridgeSeminorm {
    p: StarEpimorphism,
    q: StarEpimorphism,
    epsilon: f64,
}

impl BridgeSeminorm {
    pub fn new(p: StarEpimorphism, q: StarEpimorphism, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if p.target() != q.target() {
            return Err(Error::NotComposable(format!(
                "{} and {} are different middle algebras",
                p.target().label(),
                q.target().label()
            )));
        }
        Ok(Self { p, q, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Exact value with the true operator norm.
    pub fn eval(&self, d1: &SelfAdjointElement, d2: &SelfAdjointElement) -> Result<f64> {
        let diff = self.p.apply(d1)?.sub(&self.q.apply(d2)?)?;
        Ok(diff.operator_norm() / self.epsilon)
    }

    /// Functionals on `D₁ ⊕ D₂` coordinates.
    pub fn functionals(&self) -> (Vec<Vec<f64>>, Mode) {
        let (frame, mode) = norm_frame(self.p.target());
        let rows = frame
            .iter()
            .map(|f| {
                let mut row = self.p.pullback_coords(f);
                row.extend(self.q.pullback_coords(f).into_iter().map(|v| -v));
                row.iter_mut().for_each(|v| *v /= self.epsilon);
                row
            })
            .collect();
        (rows, mode)
    }

    /// Sampled check of the bridge Leibniz inequality
    /// `N(d∘e) ≤ ‖d‖N(e) + ‖e‖N(d)` (and its Lie analogue) on pairs of
    /// elements of `D₁ ⊕ D₂`. Returns the largest violation.
    pub fn leibniz_violation(&self, trials: usize, seed: u64) -> Result<f64> {
        let (sum, eta1, eta2) = direct_sum(self.p.source(), self.q.source());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = |x: &SelfAdjointElement| -> Result<f64> { self.eval(&eta1.apply(x)?, &eta2.apply(x)?) };
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..trials.max(1) {
            let d = SelfAdjointElement::random(&sum, &mut rng);
            let e = SelfAdjointElement::random(&sum, &mut rng);
            let bound = d.operator_norm() * n(&e)? + e.operator_norm() * n(&d)?;
            worst = worst.max(n(&d.jordan(&e)?)? - bound).max(n(&d.lie(&e)?)? - bound);
        }
        Ok(worst)
    }
}

/// Removes zero rows and rows that are a multiple `c·g` with `|c| ≤ 1` of
/// another row `g`; neither changes the max.
fn simplify_rows(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    'next: for row in rows {
        let Some(pivot) = row.iter().position(|v| v.abs() > 1e-15) else { continue };
        for k in kept.iter_mut() {
            if k[pivot].abs() <= 1e-15 {
                continue;
            }
            let c = row[pivot] / k[pivot];
            let parallel = row.iter().zip(k.iter()).all(|(r, g)| (r - c * g).abs() <= 1e-14 * (1.0 + r.abs()));
            if parallel {
                if c.abs() > 1.0 {
                    *k = row;
                }
                continue 'next;
            }
        }
        kept.push(row);
    }
    kept
}

/// `max{L₁(d₁), L₂(d₂), N(d₁, d₂)}` on `D₁ ⊕ D₂`, with the projections.
fn glued_lipnorm(
    l1: &PolyhedralLipNorm,
    l2: &PolyhedralLipNorm,
    bridge: &BridgeSeminorm,
) -> Result<(PolyhedralLipNorm, StarEpimorphism, StarEpimorphism, Mode)> {
    let (sum, eta1, eta2) = direct_sum(l1.algebra(), l2.algebra());
    let (n1, n2) = (l1.algebra().dim(), l2.algebra().dim());
    let mut rows = Vec::new();
    for f in l1.functionals() {
        let mut r = f.clone();
        r.resize(n1 + n2, 0.0);
        rows.push(r);
    }
    for f in l2.functionals() {
        let mut r = vec![0.0; n1];
        r.extend_from_slice(f);
        rows.push(r);
    }
    let (bridge_rows, mode) = bridge.functionals();
    rows.extend(bridge_rows);
    let l = PolyhedralLipNorm::new(&sum, simplify_rows(rows))?;
    Ok((l, eta1, eta2, mode))
}

/// Tunnel on `A ⊕ B` with `L(a, b) = max{L_A(a), L_B(b), (1/ε)‖link_A(a) − link_B(b)‖}`.
///
/// Such a seminorm is a tunnel only when every `a` has a partner `b` with
/// `L_B(b) ≤ L_A(a)` and `‖link_A(a) − link_B(b)‖ ≤ ε·L_A(a)`, and
/// symmetrically. This is checked with [`quotient_gap`] on both legs and a
/// failure is reported as [`Error::BridgeConditionViolated`].
pub fn bridge_tunnel(
    l_a: &PolyhedralLipNorm,
    l_b: &PolyhedralLipNorm,
    link_a: &StarEpimorphism,
    link_b: &StarEpimorphism,
    epsilon: f64,
) -> Result<Tunnel> {
    let t = bridge_tunnel_unchecked(l_a, l_b, link_a, link_b, epsilon)?;
    for leg in [LegId::A, LegId::B] {
        let report = leg_report(&t, leg, DEFAULT_SPANNING_EXTRA)?;
        if report.max_gap > TUNNEL_TOL {
            return Err(Error::BridgeConditionViolated {
                leg: leg.as_char(),
                gap: report.max_gap,
                witness: report.witness,
            });
        }
    }
    Ok(t)
}

/// [`bridge_tunnel`] without the quotient checks, for negative controls.
pub fn bridge_tunnel_unchecked(
    l_a: &PolyhedralLipNorm,
    l_b: &PolyhedralLipNorm,
    link_a: &StarEpimorphism,
    link_b: &StarEpimorphism,
    epsilon: f64,
) -> Result<Tunnel> {
    if link_a.source() != l_a.algebra() || link_b.source() != l_b.algebra() {
        return Err(Error::InvalidEpimorphism("link maps must start at the endpoint algebras".into()));
    }
    let bridge = BridgeSeminorm::new(link_a.clone(), link_b.clone(), epsilon)?;
    let (l, eta1, eta2, mode) = glued_lipnorm(l_a, l_b, &bridge)?;
    Ok(Tunnel::new(l, eta1, eta2, l_a.clone(), l_b.clone(), Provenance::Bridge, Some(epsilon))?.with_mode(mode))
}

/// The ε-composition: `L(d₁, d₂) = max{L₁(d₁), L₂(d₂), (1/ε)‖π₂(d₁) − ρ₁(d₂)‖}`
/// on `D₁ ⊕ D₂`, with legs `π₁∘η₁` and `ρ₂∘η₂`.
pub fn compose_tunnels(t1: &Tunnel, t2: &Tunnel, epsilon: f64) -> Result<Tunnel> {
    check_epsilon(epsilon)?;
    if t1.end_b.algebra() != t2.end_a.algebra() {
        return Err(Error::NotComposable(format!(
            "first tunnel ends at {}, second starts at {}",
            t1.end_b.algebra(),
            t2.end_a.algebra()
        )));
    }
    if t1.end_b != t2.end_a {
        return Err(Error::NotComposable(format!(
            "the Lip-norms on the middle algebra {} differ",
            t1.end_b.algebra().label()
        )));
    }
    let bridge = BridgeSeminorm::new(t1.leg_b.clone(), t2.leg_a.clone(), epsilon)?;
    let (l, eta1, eta2, bridge_mode) = glued_lipnorm(&t1.lipnorm, &t2.lipnorm, &bridge)?;
    let leg_a = eta1.then(&t1.leg_a)?;
    let leg_b = eta2.then(&t2.leg_b)?;
    let mode = bridge_mode.combine(t1.mode).combine(t2.mode);
    Ok(Tunnel::new(l, leg_a, leg_b, t1.end_a.clone(), t2.end_b.clone(), Provenance::Compose, Some(epsilon))?
        .with_mode(mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LegId {
    A,
    B,
}

impl LegId {
    pub fn as_char(self) -> char {
        match self {
            LegId::A => 'A',
            LegId::B => 'B',
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LegReport {
    pub leg: LegId,
    /// Largest `|quotient(a) − L_end(a)|` over the spanning set.
    pub max_gap: f64,
    pub probe: Probe,
    /// Position of the worst element among the probes of its kind.
    pub witness_index: usize,
    pub witness: Vec<f64>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub legs: Vec<LegReport>,
    pub axioms: AxiomReport,
    pub passed: bool,
    /// Set when an LP failed.
    pub error: Option<String>,
}

impl ValidationReport {
    pub fn max_gap(&self) -> f64 {
        self.legs.iter().map(|l| l.max_gap).fold(0.0, f64::max)
    }
}

/// The basis of `sa(A)` followed by `extra` random elements of operator
/// norm one from a fixed seed.
pub fn spanning_set(a: &Arc<Algebra>, extra: usize) -> Vec<Vec<f64>> {
    let n = a.dim();
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SPANNING_SEED);
    for _ in 0..extra {
        let x = SelfAdjointElement::random(a, &mut rng);
        let norm = x.operator_norm().max(1e-12);
        out.push(x.coords().into_iter().map(|v| v / norm).collect());
    }
    out
}

/// Where the quotient seminorm was compared with the endpoint Lip-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Probe {
    /// The validation spanning set.
    Spanning,
    /// A vertex of the endpoint unit ball.
    Vertex,
    /// An element where a row of the endpoint Lip-norm is maximal on the
    /// unit ball of `L_D`.
    Row,
}

/// Worst disagreement between the quotient of `L` through `π` and `L_end`.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientGap {
    pub gap: f64,
    pub probe: Probe,
    /// Position within the probes of that kind.
    pub index: usize,
    pub witness: Vec<f64>,
    /// False when the unit ball of `L_end` had too many candidate vertices
    /// and only the spanning set and the rows were probed.
    pub exhaustive: bool,
}

/// Compares the quotient of `L` through `π` with `L_end`.
///
/// The quotient is at least `L_end` iff every row `ℓ` of `L_end` satisfies
/// `sup { ℓ(π(x)) : L(x) ≤ 1 } ≤ 1`; each such sup is an LP whose maximizer
/// is probed. It is at most `L_end` iff it is at most one at every vertex of
/// the unit ball of `L_end`, being convex. Together the two probes decide
/// equality; the spanning set is probed as well.
pub fn quotient_gap(
    l: &PolyhedralLipNorm,
    pi: &StarEpimorphism,
    end: &PolyhedralLipNorm,
    extra: usize,
) -> Result<QuotientGap> {
    let mut worst = QuotientGap { gap: 0.0, probe: Probe::Spanning, index: 0, witness: Vec::new(), exhaustive: true };
    let probe = |a: Vec<f64>, kind: Probe, i: usize, worst: &mut QuotientGap| -> Result<()> {
        let gap = (quotient_lipnorm_coords(l, pi, &a)? - end.eval_coords(&a)).abs();
        if gap > worst.gap || worst.witness.is_empty() {
            worst.gap = gap;
            worst.probe = kind;
            worst.index = i;
            worst.witness = a;
        }
        Ok(())
    };
    for (i, a) in spanning_set(end.algebra(), extra).into_iter().enumerate() {
        probe(a, Probe::Spanning, i, &mut worst)?;
    }
    for (i, f) in end.functionals().iter().enumerate() {
        let (_, x) = maximize_on_unit_ball(l, &pi.pullback_coords(f))?;
        probe(pi.apply_coords(&x), Probe::Row, i, &mut worst)?;
    }
    match unit_ball_vertices(end, VERTEX_BUDGET) {
        Some(vertices) => {
            for (i, v) in vertices.into_iter().enumerate() {
                probe(v, Probe::Vertex, i, &mut worst)?;
            }
        }
        None => worst.exhaustive = false,
    }
    Ok(worst)
}

fn leg_report(t: &Tunnel, leg: LegId, extra: usize) -> Result<LegReport> {
    let (pi, end) = match leg {
        LegId::A => (&t.leg_a, &t.end_a),
        LegId::B => (&t.leg_b, &t.end_b),
    };
    let q = quotient_gap(&t.lipnorm, pi, end, extra)?;
    Ok(LegReport {
        leg,
        max_gap: q.gap,
        probe: q.probe,
        witness_index: q.index,
        witness: q.witness,
        exhaustive: q.exhaustive,
    })
}

/// Quotient conditions on both legs plus the Lip-norm axioms of `L_D`.
pub fn validate_tunnel(t: &Tunnel, extra: usize) -> ValidationReport {
    let axioms = check_lipnorm_axioms(&t.lipnorm);
    let mut legs = Vec::new();
    let mut error = None;
    for leg in [LegId::A, LegId::B] {
        match leg_report(t, leg, extra) {
            Ok(r) => legs.push(r),
            Err(e) => error = Some(e.to_string()),
        }
    }
    let passed = error.is_none() && axioms.passed && legs.iter().all(|l| l.max_gap <= TUNNEL_TOL);
    ValidationReport { legs, axioms, passed, error }
}

/// Reach, depth, extent and length of one tunnel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunnelQuantities {
    pub reach: f64,
    pub depth: f64,
    pub extent: f64,
    pub length: f64,
    /// `Haus(S(D), π_A*(S(A)))` and the same for `B`.
    pub extent_a: f64,
    pub extent_b: f64,
    pub mode: Mode,
}

struct Images {
    d: Vec<State>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    mode: Mode,
}

fn images(t: &Tunnel) -> Result<Images> {
    let ed = extreme_states(t.algebra());
    let ea = extreme_states(t.end_a.algebra());
    let eb = extreme_states(t.end_b.algebra());
    let pull = |pi: &StarEpimorphism, states: &[State]| -> Result<Vec<Vec<f64>>> {
        states.iter().map(|s| Ok(pullback_state(pi, s)?.coords().to_vec())).collect()
    };
    Ok(Images {
        a: pull(&t.leg_a, &ea.states)?,
        b: pull(&t.leg_b, &eb.states)?,
        d: ed.states,
        mode: t.mode.combine(ed.mode).combine(ea.mode).combine(eb.mode),
    })
}

fn directed(l: &PolyhedralLipNorm, from: &[&[f64]], to: &[&[f64]]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for p in from {
        best = best.max(dist_to_hull_coords(l, p, to)?);
    }
    Ok(best)
}

pub fn tunnel_quantities(t: &Tunnel) -> Result<TunnelQuantities> {
    let im = images(t)?;
    let l = &t.lipnorm;
    let d: Vec<&[f64]> = im.d.iter().map(|s| s.coords()).collect();
    let a: Vec<&[f64]> = im.a.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = im.b.iter().map(Vec::as_slice).collect();
    let both: Vec<&[f64]> = a.iter().chain(b.iter()).cloned().collect();
    let extent_a = directed(l, &d, &a)?;
    let extent_b = directed(l, &d, &b)?;
    let reach = directed(l, &a, &b)?.max(directed(l, &b, &a)?);
    let depth = directed(l, &d, &both)?;
    Ok(TunnelQuantities {
        reach,
        depth,
        extent: extent_a.max(extent_b),
        length: reach.max(depth),
        extent_a,
        extent_b,
        mode: im.mode,
    })
}

/// `max` over both legs of `Haus(S(D), π*(S(end)))`; cheaper than
/// [`tunnel_quantities`] when only the extent is needed.
pub fn tunnel_extent(t: &Tunnel) -> Result<f64> {
    let im = images(t)?;
    let d: Vec<&[f64]> = im.d.iter().map(|s| s.coords()).collect();
    let a: Vec<&[f64]> = im.a.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = im.b.iter().map(Vec::as_slice).collect();
    Ok(directed(&t.lipnorm, &d, &a)?.max(directed(&t.lipnorm, &d, &b)?))
}

pub fn tunnel_reach(t: &Tunnel) -> Result<f64> {
    let im = images(t)?;
    let a: Vec<&[f64]> = im.a.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = im.b.iter().map(Vec::as_slice).collect();
    Ok(directed(&t.lipnorm, &a, &b)?.max(directed(&t.lipnorm, &b, &a)?))
}

pub fn tunnel_depth(t: &Tunnel) -> Result<f64> {
    let im = images(t)?;
    let d: Vec<&[f64]> = im.d.iter().map(|s| s.coords()).collect();
    let both: Vec<&[f64]> = im.a.iter().chain(im.b.iter()).map(Vec::as_slice).collect();
    directed(&t.lipnorm, &d, &both)
}

pub fn tunnel_length(t: &Tunnel) -> Result<f64> {
    Ok(tunnel_reach(t)?.max(tunnel_depth(t)?))
}
