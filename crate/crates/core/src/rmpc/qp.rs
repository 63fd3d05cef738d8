//! Exact active-set enumeration for small strictly convex QPs.
//!
//! minimize cᵀHc + 2fᵀc subject to a_r·c ≤ b_r.
//!
//! The optimum is the equality-constrained minimizer on some set of at most
//! n linearly independent active rows, and that minimizer is feasible. Every
//! feasible candidate costs at least the optimum, so the cheapest feasible
//! candidate over all such sets is the optimum itself.

use nalgebra::{DMatrix, DVector};

/// Feasibility slack, relative to 1 + |b|.
pub(crate) const FEAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct QpSolution {
    pub c: DVector<f64>,
    pub cost: f64,
}

pub(crate) fn cost(h: &DMatrix<f64>, f: &DVector<f64>, c: &DVector<f64>) -> f64 {
    (c.transpose() * h * c)[(0, 0)] + 2.0 * f.dot(c)
}

pub(crate) fn feasible(a: &[DVector<f64>], b: &[f64], c: &DVector<f64>) -> bool {
    a.iter().zip(b).all(|(ar, &br)| ar.dot(c) <= br + FEAS_TOL * (1.0 + br.abs()))
}

/// Returns `None` when no candidate is feasible. Rows with infinite `b` are ignored.
pub(crate) fn solve(h: &DMatrix<f64>, f: &DVector<f64>, a: &[DVector<f64>], b: &[f64]) -> Option<QpSolution> {
    let n = h.nrows();
    let rows: Vec<usize> = (0..a.len()).filter(|&r| b[r].is_finite()).collect();
    let mut best: Option<QpSolution> = None;
    let mut subset = Vec::with_capacity(n);
    for size in 0..=n.min(rows.len()) {
        combinations(rows.len(), size, &mut subset, &mut |idx| {
            let active: Vec<usize> = idx.iter().map(|&i| rows[i]).collect();
            let Some(c) = equality_minimizer(h, f, a, b, &active) else {
                return;
            };
            if !feasible(a, b, &c) {
                return;
            }
            let value = cost(h, f, &c);
            // Strict improvement only: ties keep the lexicographically first set.
            if best.as_ref().is_none_or(|s| value < s.cost) {
                best = Some(QpSolution { c, cost: value });
            }
        });
    }
    best
}

/// Minimizer of the cost on {a_r·c = b_r, r ∈ active}; `None` if the rows are dependent.
fn equality_minimizer(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    a: &[DVector<f64>],
    b: &[f64],
    active: &[usize],
) -> Option<DVector<f64>> {
    let n = h.nrows();
    let k = active.len();
    if k > 0 {
        let rows = DMatrix::from_fn(k, n, |i, j| a[active[i]][j] / a[active[i]].norm());
        let sv = rows.singular_values();
        if sv.min() <= 1e-10 * sv.max().max(1.0) {
            return None;
        }
    }
    let mut kkt = DMatrix::zeros(n + k, n + k);
    let mut rhs = DVector::zeros(n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(h);
    for i in 0..n {
        rhs[i] = -f[i];
    }
    for (i, &r) in active.iter().enumerate() {
        for j in 0..n {
            kkt[(n + i, j)] = a[r][j];
            kkt[(j, n + i)] = a[r][j];
        }
        rhs[n + i] = b[r];
    }
    let sol = kkt.lu().solve(&rhs)?;
    let c = sol.rows(0, n).into_owned();
    c.iter().all(|v| v.is_finite()).then_some(c)
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    cur.clear();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, cur, visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn unconstrained_minimum() {
        let h = DMatrix::identity(2, 2);
        let f = v(&[-1.0, 2.0]);
        let s = solve(&h, &f, &[], &[]).unwrap();
        assert!((s.c[0] - 1.0).abs() < 1e-14 && (s.c[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn projection_onto_corner() {
        // Minimize |c - (1, 1)|² over c ≤ 0 componentwise: optimum at the origin.
        let h = DMatrix::identity(2, 2);
        let f = v(&[-1.0, -1.0]);
        let a = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
        let s = solve(&h, &f, &a, &[0.0, 0.0, 0.0]).unwrap();
        assert!(s.c.norm() < 1e-14);
    }

    #[test]
    fn projection_onto_edge() {
        let h = DMatrix::identity(2, 2);
        let f = v(&[-2.0, 0.0]);
        let a = vec![v(&[1.0, 1.0])];
        let s = solve(&h, &f, &a, &[1.0]).unwrap();
        assert!((s.c[0] - 1.5).abs() < 1e-14 && (s.c[1] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn infeasible_is_none() {
        let h = DMatrix::identity(1, 1);
        let f = v(&[0.0]);
        let a = vec![v(&[1.0]), v(&[-1.0])];
        assert!(solve(&h, &f, &a, &[-1.0, -1.0]).is_none());
        assert!(solve(&h, &f, &a, &[f64::INFINITY, -1.0]).is_some());
    }

    #[test]
    fn subsets_in_order() {
        let mut seen = vec![];
        combinations(4, 2, &mut vec![], &mut |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
