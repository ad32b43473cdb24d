//! Independent oracles shared by the integration suites. Nothing here calls
//! into the simplex engine or the tunnel machinery it is compared against.
#![allow(dead_code)]

use propinquity_core::lp::{LinearProgram, Objective, RowSense};
use rand::Rng;

/// Box-bounded random program with a known interior point.
pub fn random_bounded_lp<R: Rng>(rng: &mut R) -> LinearProgram<f64> {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    let mut lp = LinearProgram::new(n, Objective::Maximize);
    let mut x0 = vec![0.0; n];
    for j in 0..n {
        let lo = -rng.gen_range(0.0..5.0);
        let hi = rng.gen_range(0.5..5.0);
        lp.set_bounds(j, Some(lo), Some(hi));
        x0[j] = rng.gen_range(lo..hi);
        lp.set_cost(j, rng.gen_range(-1.0..1.0));
    }
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs: f64 = coeffs.iter().zip(&x0).map(|(a, b)| a * b).sum();
        match rng.gen_range(0..10) {
            0 => lp.add_row(coeffs, RowSense::Eq, lhs),
            1..=5 => lp.add_row(coeffs, RowSense::Le, lhs + rng.gen_range(0.0..2.0)),
            _ => lp.add_row(coeffs, RowSense::Ge, lhs - rng.gen_range(0.0..2.0)),
        };
    }
    lp
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[i][k] -= f * a[col][k];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic feasible points of a box-bounded program.
/// Returns `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram<f64>) -> Option<f64> {
    let n = lp.num_vars();
    // hyperplanes: rows, then x_j = lo_j, then x_j = hi_j
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j].expect("boxed")));
        planes.push((e, lp.upper[j].expect("boxed")));
    }
    let total = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                let v = lp.evaluate(&x);
                let v = if lp.objective == Objective::Maximize { v } else { -v };
                if best.is_none_or(|b| v > b) {
                    best = Some(v);
                }
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best.map(|v| if lp.objective == Objective::Maximize { v } else { -v });
            }
            k -= 1;
            if idx[k] < total - n + k {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Explicit dual of a box-bounded maximization:
/// `min bᵀy + hiᵀz⁺ − loᵀz⁻  s.t.  Aᵀy + z⁺ − z⁻ = c`, with `y ≥ 0` on `≤`
/// rows (after flipping `≥` rows), `y` free on equality rows, `z± ≥ 0`.
pub fn explicit_dual(lp: &LinearProgram<f64>) -> LinearProgram<f64> {
    assert_eq!(lp.objective, Objective::Maximize);
    let n = lp.num_vars();
    let m = lp.rows.len();
    let nv = m + 2 * n;
    let mut dual = LinearProgram::new(nv, Objective::Minimize);
    for (i, row) in lp.rows.iter().enumerate() {
        let (cost, free) = match row.sense {
            RowSense::Le => (row.rhs, false),
            RowSense::Ge => (-row.rhs, false),
            RowSense::Eq => (row.rhs, true),
        };
        dual.set_cost(i, cost);
        if free {
            dual.set_free(i);
        }
    }
    for j in 0..n {
        dual.set_cost(m + j, lp.upper[j].unwrap());
        dual.set_cost(m + n + j, -lp.lower[j].unwrap());
    }
    for j in 0..n {
        let mut coeffs = vec![0.0; nv];
        for (i, row) in lp.rows.iter().enumerate() {
            coeffs[i] = if row.sense == RowSense::Ge { -row.coeffs[j] } else { row.coeffs[j] };
        }
        coeffs[m + j] = 1.0;
        coeffs[m + n + j] = -1.0;
        dual.add_row(coeffs, RowSense::Eq, lp.cost[j]);
    }
    dual
}
