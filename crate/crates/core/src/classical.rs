//! Finite metric spaces as commutative fixtures, and the classical
//! Gromov-Hausdorff distance by exhaustive search over correspondences.

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::lipnorm::PolyhedralLipNorm;
use crate::lp::{parse_rational, LpScalar};
use num_rational::BigRational;
use std::sync::Arc;

/// Default cap on `|X|·|Y|` for [`classical_gh`].
pub const DEFAULT_GH_CAP: usize = 12;
const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    label: String,
    points: Vec<String>,
    dist: Vec<Vec<f64>>,
    /// Exact distances: parsed from rational literals when available,
    /// otherwise the exact dyadic value of each double.
    exact: Vec<Vec<BigRational>>,
}

impl FiniteMetricSpace {
    pub fn new(label: impl Into<String>, points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let exact =
            dist.iter().map(|row| row.iter().map(|&v| <BigRational as LpScalar>::from_f64(v)).collect()).collect();
        Self::with_exact(label.into(), points, dist, exact)
    }

    /// Distances given as literals such as `"1/3"`, `"0.5"` or `"2"`.
    pub fn from_literals(label: impl Into<String>, points: Vec<String>, dist: &[Vec<String>]) -> Result<Self> {
        let mut exact = Vec::with_capacity(dist.len());
        for (i, row) in dist.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, text) in row.iter().enumerate() {
                out.push(
                    parse_rational(text)
                        .ok_or_else(|| Error::InvalidSpace(format!("entry ({i}, {j}) is not a number: {text:?}")))?,
                );
            }
            exact.push(out);
        }
        let dist = exact.iter().map(|row| row.iter().map(LpScalar::as_f64).collect()).collect();
        Self::with_exact(label.into(), points, dist, exact)
    }

    fn with_exact(
        label: String,
        points: Vec<String>,
        dist: Vec<Vec<f64>>,
        exact: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        let n = points.len();
        let bad = |msg: String| Err(Error::InvalidSpace(msg));
        if n == 0 {
            return bad("a metric space needs at least one point".into());
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return bad(format!("distance matrix must be {n}×{n}"));
        }
        for i in 0..n {
            for j in i + 1..n {
                if points[i] == points[j] {
                    return bad(format!("duplicate point label {:?}", points[i]));
                }
            }
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return bad(format!("d({0}, {0}) must be zero", points[i]));
            }
            for j in 0..n {
                let v = dist[i][j];
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("d({}, {}) = {v} is not a finite nonnegative number", points[i], points[j]));
                }
                if exact[i][j] != exact[j][i] {
                    return bad(format!("distance matrix is not symmetric at ({}, {})", points[i], points[j]));
                }
                if i != j && v == 0.0 {
                    return bad(format!("points {} and {} coincide", points[i], points[j]));
                }
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + METRIC_TOL {
                        return bad(format!(
                            "triangle inequality fails for ({}, {}, {})",
                            points[i], points[j], points[k]
                        ));
                    }
                }
            }
        }
        Ok(Self { label, points, dist, exact })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dist(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn exact_dist(&self) -> &[Vec<BigRational>] {
        &self.exact
    }

    pub fn index_of(&self, point: &str) -> Option<usize> {
        self.points.iter().position(|p| p == point)
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().flatten().cloned().fold(0.0, f64::max)
    }

    /// CSV with a header row of point labels followed by the distance
    /// matrix. Rows may start with their point label.
    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Input(format!("csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Input(format!("csv row {}: {e}", line + 2)))?;
            rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
        }
        // a leading label column shows up as one extra cell per row, and
        // usually an empty or named corner cell in the header
        let labelled = rows.first().is_some_and(|r| r.len() == header.len() && parse_rational(&r[0]).is_none());
        let points: Vec<String> = if labelled { header[1..].to_vec() } else { header };
        let matrix: Vec<Vec<String>> = rows.into_iter().map(|r| if labelled { r[1..].to_vec() } else { r }).collect();
        Self::from_literals(label, points, &matrix)
    }
}

/// `C(X)`: one `1×1` block per point, in point order.
pub fn algebra_from_space(x: &FiniteMetricSpace) -> Arc<Algebra> {
    Algebra::commutative(x.label(), x.len()).expect("spaces are non-empty")
}

/// The Lipschitz seminorm: `(a(x) − a(y))/d(x, y)` for every unordered pair.
pub fn lipnorm_from_metric(x: &FiniteMetricSpace) -> Result<PolyhedralLipNorm> {
    lipnorm_on(&algebra_from_space(x), x)
}

/// Lipschitz seminorm of `x` on an already built copy of `C(X)`.
pub fn lipnorm_on(algebra: &Arc<Algebra>, x: &FiniteMetricSpace) -> Result<PolyhedralLipNorm> {
    let n = x.len();
    if algebra.blocks() != vec![1; n].as_slice() {
        return Err(Error::Dimension(format!("{} is not C^{n}", algebra.label())));
    }
    let mut fs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = x.dist()[i][j];
            if d <= 0.0 {
                return Err(Error::InvalidSpace(format!("points {i} and {j} coincide")));
            }
            let mut f = vec![0.0; n];
            f[i] = 1.0 / d;
            f[j] = -1.0 / d;
            fs.push(f);
        }
    }
    PolyhedralLipNorm::new(algebra, fs)
}

/// `½ · min_R dis(R)` over surjective correspondences `R ⊆ X × Y`.
pub fn classical_gh_with<T: LpScalar>(dx: &[Vec<T>], dy: &[Vec<T>], cap: usize) -> Result<T> {
    let (n, m) = (dx.len(), dy.len());
    if n * m > cap || n * m >= 64 {
        return Err(Error::SizeCap(format!("|X|·|Y| = {} exceeds the enumeration cap {cap}", n * m)));
    }
    let bits = n * m;
    let mut best: Option<T> = None;
    let mut related: Vec<(usize, usize)> = Vec::with_capacity(bits);
    for mask in 1u64..(1u64 << bits) {
        related.clear();
        let (mut cover_x, mut cover_y) = (0u64, 0u64);
        for b in 0..bits {
            if mask >> b & 1 == 1 {
                let (i, j) = (b / m, b % m);
                related.push((i, j));
                cover_x |= 1 << i;
                cover_y |= 1 << j;
            }
        }
        if cover_x.count_ones() as usize != n || cover_y.count_ones() as usize != m {
            continue;
        }
        let mut dis = T::zero();
        'pairs: for (p, &(i, j)) in related.iter().enumerate() {
            for &(k, l) in &related[p + 1..] {
                let v = (dx[i][k].clone() - dy[j][l].clone()).abs_val();
                if v > dis {
                    dis = v;
                    if best.as_ref().is_some_and(|b| dis >= *b) {
                        break 'pairs;
                    }
                }
            }
        }
        if best.as_ref().map_or(true, |b| dis < *b) {
            best = Some(dis);
        }
    }
    let two = T::one() + T::one();
    Ok(best.expect("the full relation is a correspondence") / two)
}

pub fn classical_gh(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: usize) -> Result<f64> {
    classical_gh_with(x.dist(), y.dist(), cap)
}

pub fn classical_gh_exact(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: usize) -> Result<BigRational> {
    classical_gh_with(x.exact_dist(), y.exact_dist(), cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SelfAdjointElement;

    fn space(label: &str, d: Vec<Vec<f64>>) -> FiniteMetricSpace {
        let pts = (0..d.len()).map(|i| format!("p{i}")).collect();
        FiniteMetricSpace::new(label, pts, d).unwrap()
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn validation() {
        let pts = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        assert!(FiniteMetricSpace::new("x", pts(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new("x", pts(2), vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        let bad_triangle = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(FiniteMetricSpace::new("x", pts(3), bad_triangle).is_err());
        assert!(FiniteMetricSpace::new("x", vec![], vec![]).is_err());
    }

    #[test]
    fn algebra_and_lipschitz_seminorm() {
        let x = space("X3", vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let a = algebra_from_space(&x);
        assert_eq!(a.blocks(), &[1, 1, 1]);
        let l = lipnorm_from_metric(&x).unwrap();
        let f = SelfAdjointElement::from_values(&a, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(l.eval(&f).unwrap(), 2.0);
        assert_eq!(l.eval(&SelfAdjointElement::unit(&a)).unwrap(), 0.0);
        let two = space("X2", vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let l2 = lipnorm_from_metric(&two).unwrap();
        let g = SelfAdjointElement::from_values(l2.algebra(), &[0.0, 1.0]).unwrap();
        assert_eq!(l2.eval(&g).unwrap(), 1.0);
    }

    #[test]
    fn gh_examples_exact() {
        let one = space("X1", vec![vec![0.0]]);
        let two = space("X2", vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let two_far = space("Y2", vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(classical_gh_exact(&two, &two, 12).unwrap(), BigRational::from_integer(0.into()));
        assert_eq!(classical_gh_exact(&two, &one, 12).unwrap(), half());
        assert_eq!(classical_gh_exact(&two, &two_far, 12).unwrap(), half());
        assert_eq!(classical_gh(&two, &one, 12).unwrap(), 0.5);
    }

    #[test]
    fn gh_refuses_above_cap() {
        let one = space("X1", vec![vec![0.0]]);
        let n = 13;
        let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        let big = space("X13", d);
        assert!(matches!(classical_gh(&big, &one, 12), Err(Error::SizeCap(_))));
        assert_eq!(classical_gh(&big, &one, 13).unwrap(), 0.5);
    }

    #[test]
    fn rational_literals_and_csv() {
        let pts = vec!["a".to_string(), "b".to_string()];
        let lit = vec![vec!["0".to_string(), "1/3".to_string()], vec!["1/3".to_string(), "0".to_string()]];
        let x = FiniteMetricSpace::from_literals("R", pts, &lit).unwrap();
        let one = space("X1", vec![vec![0.0]]);
        assert_eq!(classical_gh_exact(&x, &one, 12).unwrap(), BigRational::new(1.into(), 6.into()));

        let csv = "a,b,c\n0,1,2\n1,0,1\n2,1,0\n";
        let y = FiniteMetricSpace::from_csv("P", csv).unwrap();
        assert_eq!(y.points(), &["a", "b", "c"]);
        assert_eq!(y.dist()[0][2], 2.0);
        let labelled = ",a,b\na,0,0.5\nb,0.5,0\n";
        let z = FiniteMetricSpace::from_csv("Q", labelled).unwrap();
        assert_eq!(z.points(), &["a", "b"]);
        assert_eq!(z.dist()[1][0], 0.5);
    }
}
