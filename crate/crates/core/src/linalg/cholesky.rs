//! Envelope (skyline) Cholesky factorization with reverse Cuthill-McKee
//! reordering.
//!
//! The fine DG systems are banded once reordered: on an `M×M` block grid with
//! `m` cells per block side the RCM envelope is roughly `2·M·(m+1)` wide, so a
//! profile factorization is both simple and fast enough for the 10×10 by 10×10
//! problem (about 12k unknowns).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::sparse::CsrMatrix;

/// Relative pivot floor below which the matrix is reported as indefinite.
const PIVOT_FLOOR: f64 = 1e-14;

/// Lower-triangular factor `P A Pᵀ = L Lᵀ` stored row by row over its envelope.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// first stored column of each row of `L`
    first: Vec<usize>,
    /// offset of `L[i, first[i]]` in `vals`
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, _) = a.row(old_i);
            for &c in cols {
                let new_j = iperm[c];
                if new_j < first[new_i] {
                    first[new_i] = new_j;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);

        let mut vals = vec![0.0; total];
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, v) = a.row(old_i);
            for (&c, &x) in cols.iter().zip(v) {
                let new_j = iperm[c];
                if new_j <= new_i {
                    vals[start[new_i] + new_j - first[new_i]] += x;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = vals.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &done[start[j]..start[j] + j - fj + 1];
                let dot: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(&row_j[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                row_i[j - fi] = (row_i[j - fi] - dot) / row_j[j - fj];
            }
            let diag = row_i[i - fi];
            let sq: f64 = row_i[..i - fi].iter().map(|x| x * x).sum();
            let pivot = diag - sq;
            if !(pivot > PIVOT_FLOOR * diag.abs()) {
                return Err(Error::NotPositiveDefinite { index: i, pivot });
            }
            row_i[i - fi] = pivot.sqrt();
        }

        Ok(Self {
            n,
            perm,
            first,
            start,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = Pb
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        // Lᵀ z = y, column sweep over the stored rows
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let zi = y[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                y[k] -= l * zi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern of `a`.
/// Returns `perm[new] = old`. Ties are broken by index so the ordering is
/// deterministic.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).0.iter().copied().filter(|&c| c != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        let root = pseudo_peripheral(seed, &adj, &degree, &mut level);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(root: usize, adj: &[Vec<usize>], level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = touched
        .iter()
        .copied()
        .filter(|&v| level[v] == depth)
        .collect();
    for &v in &touched {
        level[v] = usize::MAX;
    }
    (depth, last)
}

fn pseudo_peripheral(
    seed: usize,
    adj: &[Vec<usize>],
    degree: &[usize],
    level: &mut [usize],
) -> usize {
    let mut root = seed;
    let (mut depth, mut last) = bfs_levels(root, adj, level);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (d, l) = bfs_levels(cand, adj, level);
        if d <= depth {
            break;
        }
        root = cand;
        depth = d;
        last = l;
    }
    root
}

/// Relative residual accepted outright.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Normwise backward error `‖r‖∞ / (‖K‖∞‖x‖∞ + ‖b‖∞)` accepted when the
/// relative residual is limited by conditioning rather than by the solve.
pub const BACKWARD_ERROR_TOLERANCE: f64 = 1e-13;
const MAX_REFINEMENTS: usize = 3;

/// Solve `K x = b` for symmetric positive definite `K`.
///
/// Iterative refinement is applied (at most three steps). The result is
/// rejected unless the relative residual is at most `RESIDUAL_TOLERANCE` or
/// the backward error at most `BACKWARD_ERROR_TOLERANCE`.
pub fn spd_solve(k: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = SparseCholesky::factor(k)?;
    solve_refined(&chol, k, b)
}

pub(crate) fn solve_refined(chol: &SparseCholesky, k: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let mut x = chol.solve(b);
    let mut r = residual(k, &x, b);
    let mut rel = norm(&r) / bnorm;
    for _ in 0..MAX_REFINEMENTS {
        if rel <= 1e-3 * RESIDUAL_TOLERANCE {
            break;
        }
        let dx = chol.solve(&r);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi + d).collect();
        let r_trial = residual(k, &trial, b);
        let rel_trial = norm(&r_trial) / bnorm;
        if rel_trial >= rel {
            break;
        }
        (x, r, rel) = (trial, r_trial, rel_trial);
    }
    if rel <= RESIDUAL_TOLERANCE {
        return Ok(x);
    }
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let backward = inf(&r) / (k.inf_norm() * inf(&x) + inf(b));
    if backward <= BACKWARD_ERROR_TOLERANCE {
        Ok(x)
    } else {
        Err(Error::NotConverged { residual: rel })
    }
}

fn residual(k: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let kx = k.mul_vec(x);
    b.iter().zip(&kx).map(|(bi, ki)| bi - ki).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
