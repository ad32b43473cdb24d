//! The nine acceptance criteria as reusable checks, shared by the
//! `acceptance` test target and the `audit` command.
//!
//! Every check reports a margin: the amount by which the inequality holds,
//! negative when it fails. A criterion passes when its worst margin is at
//! least minus its tolerance.

use crate::algebra::{direct_sum, Algebra};
use crate::classical::{classical_gh, classical_gh_exact, FiniteMetricSpace};
use crate::error::Result;
use crate::fixtures::{lipnormed, triangle_triple};
use crate::lipnorm::PolyhedralLipNorm;
use crate::lp::{solve, LinearProgram, Objective, RowSense};
use crate::propinquity::{
    enumerate_links, link_maps, propinquity_upper_bound_cached, triangle_audit_cached, SearchCache, TunnelFamilySpec,
    AUDIT_TOL,
};
use crate::states::{mk_distance, pullback_state, random_unit_vector, state_diameter, Mode, State};
use crate::tunnels::{
    bridge_tunnel, compose_tunnels, quotient_gap, reverse_tunnel, tunnel_extent, tunnel_quantities, validate_tunnel,
    Tunnel, TunnelQuantities, DEFAULT_SPANNING_EXTRA,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Bridge ε values of the battery.
pub const BATTERY_EPSILONS: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];
/// Metric-axiom and classical checks that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-9;
/// Solver agreement tolerance.
pub const SOLVER_TOL: f64 = 1e-8;
/// Largest `|X|·|Y|` the audit hands to the correspondence enumeration.
pub const AUDIT_GH_CAP: usize = 16;
const MAX_FAILURES: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub checks: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub mode: Mode,
    /// Named summary values, e.g. battery sizes or the triangle terms.
    pub values: BTreeMap<String, f64>,
    /// The first few failing checks.
    pub failures: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8, name: &str, tolerance: f64) -> Self {
        Self {
            id,
            name: name.to_string(),
            checks: 0,
            worst_margin: f64::INFINITY,
            tolerance,
            passed: true,
            mode: Mode::Exact,
            values: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    /// Records one check with the given margin.
    fn check(&mut self, margin: f64, what: impl FnOnce() -> String) {
        self.check_within(margin, self.tolerance, what)
    }

    /// Same, for a check with its own tolerance.
    fn check_within(&mut self, margin: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
        if !(margin >= -tol) {
            self.passed = false;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(format!("{} (margin {margin:e})", what()));
            }
        }
    }

    fn error(&mut self, what: String) {
        self.checks += 1;
        self.passed = false;
        self.worst_margin = f64::NEG_INFINITY;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(what);
        }
    }

    fn mode(&mut self, m: Mode) {
        self.mode = self.mode.combine(m);
    }

    fn finish(mut self) -> Self {
        if self.checks == 0 {
            self.passed = false;
            self.failures.push("no checks ran".into());
        }
        if self.worst_margin == f64::INFINITY {
            self.worst_margin = 0.0;
        }
        self
    }

    /// `criterion 3 PASS isometric embedding (… checks, worst margin …)`.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {} {} {} ({} checks, worst margin {:.3e}, {})",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.worst_margin,
            self.mode.as_str()
        )
    }
}

/// A tunnel of the battery with its quantities.
#[derive(Debug, Clone)]
pub struct BatteryTunnel {
    pub name: String,
    pub tunnel: Tunnel,
    pub quantities: TunnelQuantities,
}

/// A depth-two composition of the battery with its factors.
#[derive(Debug, Clone)]
pub struct BatteryComposition {
    pub first: usize,
    pub second: usize,
    pub entry: BatteryTunnel,
}

#[derive(Debug, Clone)]
pub struct Battery {
    pub bridges: Vec<BatteryTunnel>,
    pub compositions: Vec<BatteryComposition>,
}

fn eps_label(eps: f64) -> String {
    let inv = 1.0 / eps;
    if inv.fract() == 0.0 && inv > 1.0 {
        format!("1/{inv}")
    } else {
        format!("{eps}")
    }
}

/// Bridges between every pair `i ≤ j` of `spaces` at every ε, through the
/// single link `(0, 0)` and the first maximal matching, keeping the ones
/// that satisfy the bridge condition; then every composition `τ₁ ∘_ε τ₂`
/// of a bridge `i → j` with a bridge `j → k`, `i ≤ j ≤ k`, at their common ε.
pub fn build_battery(spaces: &[PolyhedralLipNorm], epsilons: &[f64]) -> Result<Battery> {
    let mut jobs = Vec::new();
    for i in 0..spaces.len() {
        for j in i..spaces.len() {
            let links = enumerate_links(spaces[i].algebra(), spaces[j].algebra());
            let mut chosen: Vec<Vec<(usize, usize)>> = Vec::new();
            if links.iter().any(|l| l == &vec![(0, 0)]) {
                chosen.push(vec![(0, 0)]);
            }
            if let Some(m) = links.iter().find(|l| l.len() > 1) {
                chosen.push(m.clone());
            }
            for link in chosen {
                for &eps in epsilons {
                    jobs.push((i, j, link.clone(), eps));
                }
            }
        }
    }
    let built: Vec<Option<(usize, usize, f64, BatteryTunnel)>> = jobs
        .par_iter()
        .map(|(i, j, link, eps)| {
            let (a, b) = (&spaces[*i], &spaces[*j]);
            let (p, q) = link_maps(a.algebra(), b.algebra(), link).ok()?;
            let t = bridge_tunnel(a, b, &p, &q, *eps).ok()?;
            let quantities = tunnel_quantities(&t).ok()?;
            let name = format!("{}→{} ε={} link{:?}", a.algebra().label(), b.algebra().label(), eps_label(*eps), link);
            Some((*i, *j, *eps, BatteryTunnel { name, tunnel: t, quantities }))
        })
        .collect();
    let built: Vec<(usize, usize, f64, BatteryTunnel)> = built.into_iter().flatten().collect();
    let mut pairs = Vec::new();
    for (x, (i1, j1, e1, _)) in built.iter().enumerate() {
        for (y, (i2, j2, e2, _)) in built.iter().enumerate() {
            if j1 == i2 && e1 == e2 && i1 <= j1 && i2 <= j2 {
                pairs.push((x, y, *e1));
            }
        }
    }
    let compositions: Vec<Result<BatteryComposition>> = pairs
        .par_iter()
        .map(|&(x, y, eps)| {
            let (t1, t2) = (&built[x].3, &built[y].3);
            let t = compose_tunnels(&t1.tunnel, &t2.tunnel, eps)?;
            let quantities = tunnel_quantities(&t)?;
            let name = format!("({}) ∘ ({})", t1.name, t2.name);
            Ok(BatteryComposition { first: x, second: y, entry: BatteryTunnel { name, tunnel: t, quantities } })
        })
        .collect();
    Ok(Battery {
        compositions: compositions.into_iter().collect::<Result<_>>()?,
        bridges: built.into_iter().map(|(_, _, _, b)| b).collect(),
    })
}

/// Criterion 1: `max{reach, depth} ≤ extent ≤ reach + depth ≤ 2·length`,
/// failing outright when the battery has fewer than `min_bridges` bridges.
pub fn criterion_equivalence(battery: &Battery, min_bridges: usize) -> CriterionResult {
    let mut r = CriterionResult::new(1, "length-extent equivalence", AUDIT_TOL);
    r.values.insert("bridges".into(), battery.bridges.len() as f64);
    r.values.insert("compositions".into(), battery.compositions.len() as f64);
    let all = battery.bridges.iter().chain(battery.compositions.iter().map(|c| &c.entry));
    for t in all {
        let q = &t.quantities;
        r.mode(q.mode);
        r.check(q.extent - q.reach.max(q.depth), || format!("{}: extent below max(reach, depth)", t.name));
        r.check(q.reach + q.depth - q.extent, || format!("{}: extent above reach + depth", t.name));
        r.check(2.0 * q.length - q.reach - q.depth, || format!("{}: reach + depth above 2·length", t.name));
    }
    if battery.bridges.len() < min_bridges {
        r.error(format!("only {} bridge tunnels in the battery", battery.bridges.len()));
    }
    r.finish()
}

/// Criterion 2: `extent(τ₁ ∘_ε τ₂) ≤ extent(τ₁) + extent(τ₂) + ε` on
/// `count` random composable pairs drawn from the battery bridges and their
/// reversals, with ε drawn from [`BATTERY_EPSILONS`].
pub fn criterion_composition(battery: &Battery, count: usize, seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(2, "composition bound", AUDIT_TOL);
    let mut pool: Vec<(String, Tunnel, f64)> = Vec::new();
    for b in &battery.bridges {
        pool.push((b.name.clone(), b.tunnel.clone(), b.quantities.extent));
        pool.push((format!("rev({})", b.name), reverse_tunnel(&b.tunnel), b.quantities.extent));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::new();
    let mut attempts = 0;
    while draws.len() < count && attempts < 100 * count.max(1) && !pool.is_empty() {
        attempts += 1;
        let x = rng.gen_range(0..pool.len());
        let next: Vec<usize> = (0..pool.len()).filter(|&y| pool[x].1.end_b() == pool[y].1.end_a()).collect();
        if next.is_empty() {
            continue;
        }
        let y = next[rng.gen_range(0..next.len())];
        let eps = BATTERY_EPSILONS[rng.gen_range(0..BATTERY_EPSILONS.len())];
        draws.push((x, y, eps));
    }
    let outcomes: Vec<Result<(f64, Mode)>> = draws
        .par_iter()
        .map(|&(x, y, eps)| {
            let t = compose_tunnels(&pool[x].1, &pool[y].1, eps)?;
            Ok((tunnel_extent(&t)?, t.mode()))
        })
        .collect();
    for ((x, y, eps), out) in draws.iter().zip(outcomes) {
        match out {
            Ok((extent, mode)) => {
                r.mode(mode);
                r.check(pool[*x].2 + pool[*y].2 + eps - extent, || {
                    format!("({}) ∘_{} ({})", pool[*x].0, eps_label(*eps), pool[*y].0)
                });
            }
            Err(e) => r.error(format!("({}) ∘ ({}): {e}", pool[*x].0, pool[*y].0)),
        }
    }
    r.values.insert("pairs".into(), draws.len() as f64);
    if draws.len() < count {
        r.error(format!("only {} composable pairs drawn", draws.len()));
    }
    r.finish()
}

/// A random state: a convex combination of one random vector state per
/// block, or, one time in four, a single vector state.
pub fn random_state(algebra: &std::sync::Arc<Algebra>, rng: &mut ChaCha8Rng) -> Result<State> {
    let n = algebra.num_blocks();
    if rng.gen_range(0..4) == 0 {
        let b = rng.gen_range(0..n);
        let v = random_unit_vector(algebra.blocks()[b], rng);
        return State::vector(algebra, b, &v);
    }
    let mut states = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for b in 0..n {
        let v = random_unit_vector(algebra.blocks()[b], rng);
        states.push(State::vector(algebra, b, &v)?);
        weights.push(-(1.0 - rng.gen::<f64>()).ln());
    }
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    State::mixture(&states, &weights)
}

/// Criterion 3: the pullbacks through `η₁, η₂` are isometries for the
/// Monge-Kantorovich metrics, on `pairs` random state pairs per composed
/// tunnel split evenly between the summands.
pub fn criterion_isometric_embedding(battery: &Battery, pairs: usize, seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(3, "isometric embedding", AUDIT_TOL);
    let per_tunnel: Vec<Result<Vec<(f64, usize)>>> = battery
        .compositions
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let t1 = &battery.bridges[c.first].tunnel;
            let t2 = &battery.bridges[c.second].tunnel;
            let (_, eta1, eta2) = direct_sum(t1.algebra(), t2.algebra());
            let l = c.entry.tunnel.lipnorm();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut out = Vec::with_capacity(pairs);
            for n in 0..pairs {
                let (eta, li) = if n % 2 == 0 { (&eta1, t1.lipnorm()) } else { (&eta2, t2.lipnorm()) };
                let phi = random_state(li.algebra(), &mut rng)?;
                let psi = random_state(li.algebra(), &mut rng)?;
                let inner = mk_distance(li, &phi, &psi)?;
                let outer = mk_distance(l, &pullback_state(eta, &phi)?, &pullback_state(eta, &psi)?)?;
                out.push((-(outer - inner).abs(), n));
            }
            Ok(out)
        })
        .collect();
    for (c, out) in battery.compositions.iter().zip(per_tunnel) {
        r.mode(c.entry.tunnel.mode());
        match out {
            Ok(margins) => {
                for (m, n) in margins {
                    r.check(m, || format!("{}: state pair {n}", c.entry.name));
                }
            }
            Err(e) => r.error(format!("{}: {e}", c.entry.name)),
        }
    }
    r.values.insert("composed tunnels".into(), battery.compositions.len() as f64);
    r.finish()
}

/// Criterion 4: the quotient of every composed Lip-norm onto each summand
/// is the summand's Lip-norm, and every composed tunnel validates.
pub fn criterion_quotient_recovery(battery: &Battery) -> CriterionResult {
    let mut r = CriterionResult::new(4, "quotient recovery", AUDIT_TOL);
    let outcomes: Vec<Result<(f64, f64, f64, bool)>> = battery
        .compositions
        .par_iter()
        .map(|c| {
            let t1 = &battery.bridges[c.first].tunnel;
            let t2 = &battery.bridges[c.second].tunnel;
            let (_, eta1, eta2) = direct_sum(t1.algebra(), t2.algebra());
            let l = c.entry.tunnel.lipnorm();
            let g1 = quotient_gap(l, &eta1, t1.lipnorm(), DEFAULT_SPANNING_EXTRA)?.gap;
            let g2 = quotient_gap(l, &eta2, t2.lipnorm(), DEFAULT_SPANNING_EXTRA)?.gap;
            let v = validate_tunnel(&c.entry.tunnel, DEFAULT_SPANNING_EXTRA);
            Ok((g1, g2, v.max_gap(), v.passed))
        })
        .collect();
    for (c, out) in battery.compositions.iter().zip(outcomes) {
        r.mode(c.entry.tunnel.mode());
        match out {
            Ok((g1, g2, g, passed)) => {
                r.check(-g1, || format!("{}: quotient onto D₁", c.entry.name));
                r.check(-g2, || format!("{}: quotient onto D₂", c.entry.name));
                r.check(-g, || format!("{}: leg quotients", c.entry.name));
                if !passed {
                    r.error(format!("{}: validation failed", c.entry.name));
                }
            }
            Err(e) => r.error(format!("{}: {e}", c.entry.name)),
        }
    }
    r.finish()
}

/// Criterion 5 on the fixture triple.
pub fn criterion_triangle(spec: &TunnelFamilySpec, cache: &SearchCache) -> CriterionResult {
    let mut r = CriterionResult::new(5, "triangle inequality", AUDIT_TOL);
    let [a, b, e] = triangle_triple();
    match triangle_audit_cached(&lipnormed(&a), &lipnormed(&b), &lipnormed(&e), spec, cache) {
        Ok(t) => {
            r.mode(t.mode);
            for (k, v) in [
                ("bound_ab", t.bound_ab),
                ("bound_be", t.bound_be),
                ("bound_ae", t.bound_ae),
                ("bound_ae_search", t.bound_ae_search),
                ("composed_extent", t.composed_extent),
                ("epsilon_min", t.epsilon_min),
            ] {
                r.values.insert(k.into(), v);
            }
            r.check(t.margin, || format!("{} → {} → {}", t.labels[0], t.labels[1], t.labels[2]));
        }
        Err(err) => r.error(err.to_string()),
    }
    r.finish()
}

/// Search results between two fixture spaces, in both orientations.
#[derive(Debug, Clone, Serialize)]
pub struct PairBound {
    pub a: String,
    pub b: String,
    pub bound_ab: f64,
    pub bound_ba: f64,
    pub diam_a: f64,
    pub diam_b: f64,
    pub length: f64,
    pub extent: f64,
    pub mode: Mode,
    pub candidates: usize,
}

/// Bounds for every pair `i ≤ j` of `spaces`.
pub fn fixture_bounds(
    spaces: &[FiniteMetricSpace],
    spec: &TunnelFamilySpec,
    cache: &SearchCache,
) -> Result<Vec<PairBound>> {
    let ls: Vec<PolyhedralLipNorm> = spaces.iter().map(lipnormed).collect();
    let diams: Vec<f64> = ls.iter().map(|l| state_diameter(l).map(|q| q.value)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..ls.len() {
        for j in i..ls.len() {
            let ab = propinquity_upper_bound_cached(&ls[i], &ls[j], spec, cache)?;
            let ba = propinquity_upper_bound_cached(&ls[j], &ls[i], spec, cache)?;
            out.push(PairBound {
                a: spaces[i].label().to_string(),
                b: spaces[j].label().to_string(),
                bound_ab: ab.bound,
                bound_ba: ba.bound,
                diam_a: diams[i],
                diam_b: diams[j],
                length: ab.quantities.length,
                extent: ab.quantities.extent,
                mode: ab.mode.combine(ba.mode),
                candidates: ab.candidates,
            });
        }
    }
    Ok(out)
}

/// Criterion 6: `bound ≤ 2·max{diam S(A), diam S(B)}`.
pub fn criterion_diameter(bounds: &[PairBound]) -> CriterionResult {
    let mut r = CriterionResult::new(6, "diameter bound", AUDIT_TOL);
    for p in bounds {
        r.mode(p.mode);
        let cap = 2.0 * p.diam_a.max(p.diam_b);
        r.check(cap - p.bound_ab, || format!("{}–{}: bound {} above {cap}", p.a, p.b, p.bound_ab));
    }
    r.finish()
}

/// Criterion 7: exact symmetry, zero self-distance, and the length-extent
/// sandwich on every witness.
pub fn criterion_metric_axioms(bounds: &[PairBound]) -> CriterionResult {
    let mut r = CriterionResult::new(7, "metric axioms", AUDIT_TOL);
    for p in bounds {
        r.mode(p.mode);
        if p.bound_ab.to_bits() != p.bound_ba.to_bits() {
            r.error(format!("{}–{}: {} ≠ {}", p.a, p.b, p.bound_ab, p.bound_ba));
        } else {
            r.check(0.0, || unreachable!());
        }
        if p.a == p.b {
            r.check_within(-p.bound_ab.abs(), EXACT_TOL, || format!("{}: self-distance {}", p.a, p.bound_ab));
        }
        r.check(p.extent - p.length, || format!("{}–{}: witness extent below length", p.a, p.b));
        r.check(2.0 * p.length - p.extent, || format!("{}–{}: witness extent above 2·length", p.a, p.b));
    }
    r.finish()
}

/// Criterion 8: Dirac distances recover the metric, the reference
/// Gromov-Hausdorff values hold in rational arithmetic, and every bound
/// dominates the classical distance.
pub fn criterion_classical(spaces: &[FiniteMetricSpace], bounds: &[PairBound]) -> CriterionResult {
    let mut r = CriterionResult::new(8, "classical consistency", AUDIT_TOL);
    for x in spaces {
        let l = lipnormed(x);
        for i in 0..x.len() {
            for j in 0..x.len() {
                let d = State::dirac(l.algebra(), i)
                    .and_then(|p| Ok((p, State::dirac(l.algebra(), j)?)))
                    .and_then(|(p, q)| mk_distance(&l, &p, &q));
                match d {
                    Ok(v) => r.check_within(-(v - x.dist()[i][j]).abs(), EXACT_TOL, || {
                        format!("{}: mk(δ{}, δ{}) = {v}", x.label(), x.points()[i], x.points()[j])
                    }),
                    Err(e) => r.error(format!("{}: {e}", x.label())),
                }
            }
        }
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let two = |d: f64| crate::fixtures::two_point(d);
    for (x, y) in [(two(1.0), crate::fixtures::one_point()), (two(1.0), two(2.0))] {
        match classical_gh_exact(&x, &y, AUDIT_GH_CAP) {
            Ok(v) if v == half => r.check(0.0, String::new),
            Ok(v) => r.error(format!("GH({}, {}) = {v}, expected 1/2", x.label(), y.label())),
            Err(e) => r.error(e.to_string()),
        }
    }
    for p in bounds {
        let (Some(x), Some(y)) = (spaces.iter().find(|s| s.label() == p.a), spaces.iter().find(|s| s.label() == p.b))
        else {
            continue;
        };
        r.mode(p.mode);
        match classical_gh(x, y, AUDIT_GH_CAP) {
            Ok(gh) => r.check(p.bound_ab - gh, || format!("{}–{}: bound {} below GH {gh}", p.a, p.b, p.bound_ab)),
            Err(e) => r.error(format!("{}–{}: {e}", p.a, p.b)),
        }
    }
    r.finish()
}

/// A program with box bounds and a known interior point.
pub fn random_bounded_program(rng: &mut ChaCha8Rng) -> LinearProgram<f64> {
    // dyadic data so the rational copy is the same program
    let dy = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo..hi) * 1024.0).round() / 1024.0;
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    let mut lp = LinearProgram::new(n, Objective::Maximize);
    let mut x0 = vec![0.0; n];
    for j in 0..n {
        let lo = -dy(rng, 0.0, 5.0);
        let hi = dy(rng, 0.5, 5.0);
        lp.set_bounds(j, Some(lo), Some(hi));
        x0[j] = (lo + hi) / 2.0;
        lp.set_cost(j, dy(rng, -1.0, 1.0));
    }
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| dy(rng, -1.0, 1.0)).collect();
        let lhs: f64 = coeffs.iter().zip(&x0).map(|(a, b)| a * b).sum();
        match rng.gen_range(0..10) {
            0 => lp.add_row(coeffs, RowSense::Eq, lhs),
            1..=5 => lp.add_row(coeffs, RowSense::Le, lhs + dy(rng, 0.0, 2.0)),
            _ => lp.add_row(coeffs, RowSense::Ge, lhs - dy(rng, 0.0, 2.0)),
        };
    }
    lp
}

/// Value certified by the row duals of a boxed maximization:
/// `bᵀy + Σ_j max(r_j·lo_j, r_j·hi_j)` with reduced costs `r = c − Aᵀy`.
pub fn dual_certificate(lp: &LinearProgram<f64>, duals: &[f64]) -> f64 {
    let mut value: f64 = lp.rows.iter().zip(duals).map(|(r, y)| r.rhs * y).sum();
    for j in 0..lp.num_vars() {
        let reduced = lp.cost[j] - lp.rows.iter().zip(duals).map(|(r, y)| r.coeffs[j] * y).sum::<f64>();
        let (lo, hi) = (lp.lower[j].unwrap_or(0.0), lp.upper[j].unwrap_or(0.0));
        value += (reduced * lo).max(reduced * hi);
    }
    value
}

/// Criterion 9 without an enumeration oracle: the floating-point simplex
/// against the same engine over exact rationals, plus the duality gap of
/// the floating-point duals.
pub fn criterion_solver(count: usize, seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(9, "solver soundness", SOLVER_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let programs: Vec<LinearProgram<f64>> = (0..count).map(|_| random_bounded_program(&mut rng)).collect();
    let outcomes: Vec<std::result::Result<(f64, f64, f64), String>> = programs
        .par_iter()
        .map(|lp| {
            let approx = solve(lp).map_err(|e| e.to_string())?;
            let exact = solve(&lp.to_rational()).map_err(|e| e.to_string())?;
            if !approx.is_optimal() || !exact.is_optimal() {
                return Err(format!("status {:?} / {:?}", approx.status, exact.status));
            }
            use crate::lp::LpScalar;
            Ok((approx.value, exact.value.as_f64(), dual_certificate(lp, &approx.duals)))
        })
        .collect();
    for (k, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok((v, exact, cert)) => {
                r.check(-(v - exact).abs(), || format!("program {k}: {v} vs exact {exact}"));
                r.check(-(cert - v).abs(), || format!("program {k}: duality gap {}", cert - v));
            }
            Err(e) => r.error(format!("program {k}: {e}")),
        }
    }
    r.values.insert("programs".into(), count as f64);
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn small_battery_passes_the_inequalities() {
        let spaces: Vec<_> = [one_point(), two_point(1.0)].iter().map(lipnormed).collect();
        let b = build_battery(&spaces, &[1.0, 0.5]).unwrap();
        assert!(!b.bridges.is_empty() && !b.compositions.is_empty());
        let c = criterion_equivalence(&b, 1);
        assert!(c.passed, "{c:?}");
        assert!(criterion_composition(&b, 10, 1).passed);
        assert!(criterion_isometric_embedding(&b, 4, 1).passed);
        assert!(criterion_quotient_recovery(&b).passed);
    }

    #[test]
    fn solver_check_passes() {
        let r = criterion_solver(20, 3);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checks, 40);
    }

    #[test]
    fn failing_checks_are_recorded() {
        let mut r = CriterionResult::new(0, "probe", 1e-7);
        r.check(1.0, String::new);
        r.check(-0.5, || "bad".into());
        let r = r.finish();
        assert!(!r.passed);
        assert_eq!(r.worst_margin, -0.5);
        assert!(r.failures[0].starts_with("bad"));
        assert!(r.summary_line().starts_with("criterion 0 FAIL probe"));
    }
}
