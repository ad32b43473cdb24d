//! Small metric spaces used by tests, the audit suite and the CLI.

use crate::classical::{lipnorm_from_metric, FiniteMetricSpace};
use crate::lipnorm::PolyhedralLipNorm;

fn space(label: &str, dist: Vec<Vec<f64>>) -> FiniteMetricSpace {
    let points = (0..dist.len()).map(|i| format!("{}", (b'p' + i as u8) as char)).collect();
    FiniteMetricSpace::new(label, points, dist).expect("fixture is a metric space")
}

pub fn one_point() -> FiniteMetricSpace {
    space("X1", vec![vec![0.0]])
}

/// Two points at distance `d`, labelled `X2` for `d = 1` and `Y2` for `d = 2`.
pub fn two_point(d: f64) -> FiniteMetricSpace {
    let label = if d == 1.0 {
        "X2".to_string()
    } else if d == 2.0 {
        "Y2".to_string()
    } else {
        format!("two-point({d})")
    };
    space(&label, vec![vec![0.0, d], vec![d, 0.0]])
}

pub fn equilateral() -> FiniteMetricSpace {
    space("E3", vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]])
}

/// `p –1– q –1– r`.
pub fn path() -> FiniteMetricSpace {
    space("P3", vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])
}

/// Four points on a cycle with unit sides and diagonals of length two.
pub fn four_cycle() -> FiniteMetricSpace {
    space(
        "C4",
        vec![vec![0.0, 1.0, 2.0, 1.0], vec![1.0, 0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0, 1.0], vec![1.0, 2.0, 1.0, 0.0]],
    )
}

/// Every fixture space, smallest first.
pub fn default_spaces() -> Vec<FiniteMetricSpace> {
    vec![one_point(), two_point(1.0), two_point(2.0), equilateral(), path(), four_cycle()]
}

/// One-point, two-point at distance one, two-point at distance two.
pub fn triangle_triple() -> [FiniteMetricSpace; 3] {
    [one_point(), two_point(1.0), two_point(2.0)]
}

pub fn lipnormed(x: &FiniteMetricSpace) -> PolyhedralLipNorm {
    lipnorm_from_metric(x).expect("fixture distances are positive")
}

pub fn by_label(label: &str) -> Option<FiniteMetricSpace> {
    default_spaces().into_iter().find(|s| s.label() == label)
}
