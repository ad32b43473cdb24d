//! Commutative tunnels against shortest paths.
//!
//! For spaces of points, the glued Lip-norm of a bridge tunnel is the
//! Lipschitz seminorm of the graph on `X ⊔ Y` with the edges of both metrics
//! and an edge of weight ε per linked pair. Its Monge-Kantorovich metric on
//! Dirac states is the shortest-path metric, and the distance from `δz` to
//! the states of a subset `S` is `min_{s∈S} d(z, s)`. So, with `P` the
//! shortest-path matrix:
//!
//! * the bridge condition holds iff `P` restricted to `X` and to `Y` is the
//!   original metric;
//! * `extent = max(max_z d(z, X), max_z d(z, Y))`, `reach = Haus(X, Y)`,
//!   `depth = max_z d(z, X ∪ Y)`.
//!
//! A composition is the same picture on `X ⊔ Y ⊔ Y' ⊔ Z` with the copies of
//! `Y` joined by ε-edges.

use propinquity_core::classical::FiniteMetricSpace;
use propinquity_core::fixtures::{default_spaces, lipnormed};
use propinquity_core::propinquity::{enumerate_links, link_maps};
use propinquity_core::tunnels::{bridge_tunnel, compose_tunnels, tunnel_quantities, Tunnel};

const TOL: f64 = 1e-9;
const GRID: [f64; 5] = [2.0, 1.0, 0.5, 0.25, 0.125];

struct Graph {
    w: Vec<Vec<f64>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        let mut w = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in w.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Self { w }
    }

    fn edge(&mut self, u: usize, v: usize, len: f64) {
        self.w[u][v] = self.w[u][v].min(len);
        self.w[v][u] = self.w[v][u].min(len);
    }

    fn metric(&mut self, offset: usize, x: &FiniteMetricSpace) {
        for i in 0..x.len() {
            for j in 0..x.len() {
                if i != j {
                    self.edge(offset + i, offset + j, x.dist()[i][j]);
                }
            }
        }
    }

    fn shortest_paths(mut self) -> Vec<Vec<f64>> {
        let n = self.w.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = self.w[i][k] + self.w[k][j];
                    if via < self.w[i][j] {
                        self.w[i][j] = via;
                    }
                }
            }
        }
        self.w
    }
}

fn to_set(p: &[Vec<f64>], z: usize, set: &[usize]) -> f64 {
    set.iter().map(|&s| p[z][s]).fold(f64::INFINITY, f64::min)
}

fn restricts_to(p: &[Vec<f64>], offset: usize, x: &FiniteMetricSpace) -> bool {
    (0..x.len()).all(|i| (0..x.len()).all(|j| (p[offset + i][offset + j] - x.dist()[i][j]).abs() < TOL))
}

/// `(extent, reach, depth)` for legs reading the node sets `a` and `b`.
fn predicted(p: &[Vec<f64>], a: &[usize], b: &[usize]) -> (f64, f64, f64) {
    let all: Vec<usize> = (0..p.len()).collect();
    let both: Vec<usize> = a.iter().chain(b).cloned().collect();
    let directed = |from: &[usize], to: &[usize]| from.iter().map(|&z| to_set(p, z, to)).fold(0.0, f64::max);
    (directed(&all, a).max(directed(&all, b)), directed(a, b).max(directed(b, a)), directed(&all, &both))
}

fn assert_matches(t: &Tunnel, expected: (f64, f64, f64), what: &str) {
    let q = tunnel_quantities(t).unwrap();
    assert!((q.extent - expected.0).abs() < TOL, "{what}: extent {} vs {}", q.extent, expected.0);
    assert!((q.reach - expected.1).abs() < TOL, "{what}: reach {} vs {}", q.reach, expected.1);
    assert!((q.depth - expected.2).abs() < TOL, "{what}: depth {} vs {}", q.depth, expected.2);
}

struct Bridge {
    x: usize,
    y: usize,
    link: Vec<(usize, usize)>,
    eps: f64,
    tunnel: Tunnel,
}

fn bridges(spaces: &[FiniteMetricSpace]) -> Vec<Bridge> {
    let mut out = Vec::new();
    for (xi, x) in spaces.iter().enumerate() {
        for (yi, y) in spaces.iter().enumerate() {
            let (lx, ly) = (lipnormed(x), lipnormed(y));
            for link in enumerate_links(lx.algebra(), ly.algebra()) {
                let (p, q) = link_maps(lx.algebra(), ly.algebra(), &link).unwrap();
                for eps in GRID {
                    let mut g = Graph::new(x.len() + y.len());
                    g.metric(0, x);
                    g.metric(x.len(), y);
                    for &(i, j) in &link {
                        g.edge(i, x.len() + j, eps);
                    }
                    let paths = g.shortest_paths();
                    let valid = restricts_to(&paths, 0, x) && restricts_to(&paths, x.len(), y);
                    let name = format!("{}→{} {link:?} ε={eps}", x.label(), y.label());
                    match bridge_tunnel(&lx, &ly, &p, &q, eps) {
                        Ok(t) => {
                            assert!(valid, "{name}: accepted but the path metric distorts an endpoint");
                            let a: Vec<usize> = (0..x.len()).collect();
                            let b: Vec<usize> = (x.len()..x.len() + y.len()).collect();
                            assert_matches(&t, predicted(&paths, &a, &b), &name);
                            out.push(Bridge { x: xi, y: yi, link: link.clone(), eps, tunnel: t });
                        }
                        Err(e) => assert!(!valid, "{name}: rejected ({e}) but the path metric is faithful"),
                    }
                }
            }
        }
    }
    out
}

#[test]
fn bridges_match_shortest_paths() {
    let spaces = default_spaces();
    let all = bridges(&spaces);
    assert!(all.len() > 100, "{}", all.len());
    // the oracle also reproduces the bridge-condition thresholds
    let two =
        all.iter().filter(|b| b.x == 1 && b.y == 2 && b.link.len() == 2).map(|b| b.eps).fold(f64::INFINITY, f64::min);
    assert_eq!(two, 0.5);
}

#[test]
fn compositions_match_shortest_paths() {
    let spaces = default_spaces();
    let all = bridges(&spaces[..4]);
    let mut checked = 0;
    for (k, b1) in all.iter().enumerate() {
        for b2 in all.iter().skip(k % 3).step_by(3) {
            if b1.y != b2.x {
                continue;
            }
            let (x, y, z) = (&spaces[b1.x], &spaces[b1.y], &spaces[b2.y]);
            for eps in [1.0, 0.25] {
                let t = compose_tunnels(&b1.tunnel, &b2.tunnel, eps).unwrap();
                let (nx, ny, nz) = (x.len(), y.len(), z.len());
                // X | Y | Y' | Z
                let mut g = Graph::new(nx + 2 * ny + nz);
                g.metric(0, x);
                g.metric(nx, y);
                g.metric(nx + ny, y);
                g.metric(nx + 2 * ny, z);
                for &(i, j) in &b1.link {
                    g.edge(i, nx + j, b1.eps);
                }
                for &(i, j) in &b2.link {
                    g.edge(nx + ny + i, nx + 2 * ny + j, b2.eps);
                }
                for i in 0..ny {
                    g.edge(nx + i, nx + ny + i, eps);
                }
                let paths = g.shortest_paths();
                let a: Vec<usize> = (0..nx).collect();
                let e: Vec<usize> = (nx + 2 * ny..nx + 2 * ny + nz).collect();
                let name = format!("{}→{}→{} ε={eps}", x.label(), y.label(), z.label());
                assert_matches(&t, predicted(&paths, &a, &e), &name);
                checked += 1;
            }
        }
    }
    assert!(checked >= 50, "{checked}");
}
