//! Family search, journeys, the classical distance and a few regressions.

use num_bigint::BigInt;
use num_rational::BigRational;
use propinquity_core::algebra::{direct_sum, Algebra};
use propinquity_core::classical::{classical_gh_exact, FiniteMetricSpace};
use propinquity_core::fixtures::*;
use propinquity_core::lipnorm::{check_leibniz, PolyhedralLipNorm, Product};
use propinquity_core::propinquity::{journey_length, link_maps, propinquity_upper_bound, Journey, TunnelFamilySpec};
use propinquity_core::tunnels::{
    bridge_tunnel, compose_tunnels, identity_tunnel, quotient_gap, reverse_tunnel, tunnel_quantities, validate_tunnel,
    DEFAULT_SPANNING_EXTRA,
};
use propinquity_core::Error;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn spec(grid: &[f64], depth: usize) -> TunnelFamilySpec {
    TunnelFamilySpec { epsilon_grid: grid.to_vec(), max_composition_depth: depth, ..Default::default() }
}

#[test]
fn bound_does_not_increase_with_a_finer_grid_or_deeper_compositions() {
    let pairs = [(one_point(), two_point(1.0)), (two_point(1.0), two_point(2.0)), (equilateral(), path())];
    for (a, b) in &pairs {
        let (la, lb) = (lipnormed(a), lipnormed(b));
        let coarse = propinquity_upper_bound(&la, &lb, &spec(&[1.0, 0.5], 2)).unwrap().bound;
        let fine = propinquity_upper_bound(&la, &lb, &spec(&[1.0, 0.5, 0.25, 0.125], 2)).unwrap().bound;
        let shallow = propinquity_upper_bound(&la, &lb, &spec(&[1.0, 0.5, 0.25, 0.125], 1)).unwrap().bound;
        assert!(fine <= coarse + 1e-12, "{}–{}: {fine} > {coarse}", a.label(), b.label());
        assert!(fine <= shallow + 1e-12, "{}–{}: {fine} > {shallow}", a.label(), b.label());
    }
}

#[test]
fn reference_bounds() {
    // extents of the best members found by the default family
    let cases =
        [(two_point(1.0), two_point(2.0), 0.5), (equilateral(), path(), 0.5), (two_point(1.0), two_point(1.0), 0.0)];
    for (a, b, want) in cases {
        let r = propinquity_upper_bound(&lipnormed(&a), &lipnormed(&b), &TunnelFamilySpec::default()).unwrap();
        assert!((r.bound - want).abs() < 1e-9, "{}–{}: {}", a.label(), b.label(), r.bound);
    }
}

#[test]
fn bound_is_symmetric_and_reversed_witness_has_right_ends() {
    let (a, b) = (lipnormed(&path()), lipnormed(&four_cycle()));
    let s = TunnelFamilySpec::default();
    let ab = propinquity_upper_bound(&a, &b, &s).unwrap();
    let ba = propinquity_upper_bound(&b, &a, &s).unwrap();
    assert_eq!(ab.bound.to_bits(), ba.bound.to_bits());
    assert_eq!(ab.witness.end_a(), &a);
    assert_eq!(ba.witness.end_a(), &b);
}

#[test]
fn journey_length_adds_up() {
    let (x, y) = (lipnormed(&two_point(1.0)), lipnormed(&two_point(2.0)));
    let (p, r) = link_maps(x.algebra(), y.algebra(), &[(0, 0), (1, 1)]).unwrap();
    let t = bridge_tunnel(&x, &y, &p, &r, 0.5).unwrap();
    let back = reverse_tunnel(&t);
    let j = Journey::new(vec![t.clone(), back.clone()]).unwrap();
    let sum = tunnel_quantities(&t).unwrap().length + tunnel_quantities(&back).unwrap().length;
    assert!((journey_length(&j).unwrap() - sum).abs() < 1e-12);
    assert!(matches!(Journey::new(vec![t.clone(), t]), Err(Error::BrokenJourney(0, 1))));
}

#[test]
fn second_difference_seminorm_is_not_leibniz() {
    let a = Algebra::commutative("C3", 3).unwrap();
    let l = PolyhedralLipNorm::new(&a, vec![vec![1.0, -1.0, 0.0], vec![1.0, -2.0, 1.0]]).unwrap();
    let report = check_leibniz(&l, 500, 9);
    assert!(!report.passed);
    let (f, g, product) = report.witness.clone().unwrap();
    assert_eq!(product, Product::Jordan);
    // recompute the violation with plain arithmetic
    let lip = |h: &[f64]| (h[0] - h[1]).abs().max((h[0] - 2.0 * h[1] + h[2]).abs());
    let sup = |h: &[f64]| h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fg: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
    let excess = lip(&fg) - (sup(&f) * lip(&g) + sup(&g) * lip(&f));
    assert!(excess > 1e-6 && (excess - report.max_violation).abs() < 1e-9, "{excess} vs {report:?}");
}

#[test]
fn metric_lipnorms_pass_leibniz() {
    for x in default_spaces() {
        assert!(check_leibniz(&lipnormed(&x), 300, 1).passed, "{}", x.label());
    }
}

#[test]
fn classical_distance_is_symmetric_and_satisfies_the_triangle_inequality() {
    let spaces = default_spaces();
    let gh = |a: &FiniteMetricSpace, b: &FiniteMetricSpace| classical_gh_exact(a, b, 16).unwrap();
    for a in &spaces {
        for b in &spaces {
            assert_eq!(gh(a, b), gh(b, a));
            for c in &spaces {
                if a.len() * c.len() <= 12 && b.len() <= 3 {
                    assert!(gh(a, c) <= gh(a, b) + gh(b, c), "{} {} {}", a.label(), b.label(), c.label());
                }
            }
        }
    }
}

#[test]
fn classical_distance_vanishes_exactly_on_isometric_spaces() {
    let c4 = four_cycle();
    let relabelled = FiniteMetricSpace::from_literals(
        "C4'",
        ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
        &[vec!["0", "2", "1", "1"], vec!["2", "0", "1", "1"], vec!["1", "1", "0", "2"], vec!["1", "1", "2", "0"]]
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert_eq!(classical_gh_exact(&c4, &relabelled, 16).unwrap(), q(0, 1));
    assert_eq!(classical_gh_exact(&equilateral(), &path(), 16).unwrap(), q(1, 2));
    assert_eq!(classical_gh_exact(&two_point(1.0), &one_point(), 16).unwrap(), q(1, 2));
}

#[test]
fn identity_tunnel_has_zero_quantities() {
    let q = tunnel_quantities(&identity_tunnel(&lipnormed(&four_cycle()))).unwrap();
    assert_eq!((q.reach, q.depth, q.extent), (0.0, 0.0, 0.0));
}

#[test]
fn fine_composition_of_four_cycle_bridges_validates() {
    // this quotient program once broke the floating-point simplex
    let c = lipnormed(&four_cycle());
    let (p, r) = link_maps(c.algebra(), c.algebra(), &[(0, 0), (1, 1), (2, 2), (3, 3)]).unwrap();
    let t1 = bridge_tunnel(&c, &c, &p, &r, 0.0625).unwrap();
    let t = compose_tunnels(&t1, &t1, 0.0625).unwrap();
    let (_, eta1, eta2) = direct_sum(t1.algebra(), t1.algebra());
    for eta in [&eta1, &eta2] {
        let g = quotient_gap(t.lipnorm(), eta, t1.lipnorm(), DEFAULT_SPANNING_EXTRA).unwrap();
        assert!(g.gap < 1e-7, "{g:?}");
    }
    assert!(validate_tunnel(&t, DEFAULT_SPANNING_EXTRA).passed);
}

#[test]
fn distorting_link_is_rejected() {
    // gluing p, q of X2 to opposite corners of C4 at ε = ¼ shortens the
    // diagonal of C4 from 2 to 1.5
    let (x, c) = (lipnormed(&two_point(1.0)), lipnormed(&four_cycle()));
    let (p, r) = link_maps(x.algebra(), c.algebra(), &[(0, 1), (1, 3)]).unwrap();
    match bridge_tunnel(&x, &c, &p, &r, 0.25) {
        Err(Error::BridgeConditionViolated { leg, gap, .. }) => {
            assert_eq!(leg, 'B');
            assert!(gap > 0.2, "{gap}");
        }
        other => panic!("{other:?}"),
    }
    assert!(bridge_tunnel(&x, &c, &p, &r, 0.5).is_ok());
}
