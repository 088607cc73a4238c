//! Dense symmetric-definite generalized eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of `A ψ = λ B ψ`, eigenvalues ascending, eigenvectors stored
/// as columns and normalized so that `ΨᵀBΨ = I`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub b_orthonormal: bool,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, l: usize) -> DVector<f64> {
        self.vectors.column(l).into_owned()
    }

    /// Largest scaled residual `‖Aψ − λBψ‖ / ((‖A‖ + |λ|‖B‖)‖ψ‖)` over the
    /// first `count` pairs, with Frobenius matrix norms.
    pub fn max_scaled_residual(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, count: usize) -> f64 {
        let (na, nb) = (a.norm(), b.norm());
        (0..count.min(self.len()))
            .map(|l| {
                let psi = self.vectors.column(l);
                let lam = self.values[l];
                let r = a * psi - b * psi * lam;
                r.norm() / ((na + lam.abs() * nb) * psi.norm())
            })
            .fold(0.0, f64::max)
    }

    /// `max |ΨᵀBΨ − I|` over the leading `count × count` block.
    pub fn orthonormality_error(&self, b: &DMatrix<f64>, count: usize) -> f64 {
        let k = count.min(self.len());
        let psi = self.vectors.columns(0, k);
        let gram = psi.transpose() * b * psi;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Solve the symmetric-definite problem `A ψ = λ B ψ` densely.
///
/// Both matrices are first scaled symmetrically by `diag(B)^{-1/2}`, which
/// strips the coefficient contrast out of `B`. The scaled `B` is Cholesky
/// factored and the problem reduced to a standard symmetric eigenproblem.
pub fn generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<EigenPairs> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.nrows(),
        });
    }
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            b_orthonormal: true,
        });
    }
    let mut d = DVector::zeros(n);
    for i in 0..n {
        let bii = b[(i, i)];
        if !(bii > 0.0) {
            return Err(Error::NotPositiveDefinite {
                index: i,
                pivot: bii,
            });
        }
        d[i] = 1.0 / bii.sqrt();
    }
    let scale = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| d[i] * m[(i, j)] * d[j]);
    let a_s = symmetrize(scale(a));
    let b_s = symmetrize(scale(b));

    let chol = b_s.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        index: 0,
        pivot: f64::NAN,
    })?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let x = l
        .solve_lower_triangular(&a_s)
        .ok_or(Error::NotPositiveDefinite {
            index: 0,
            pivot: 0.0,
        })?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::NotPositiveDefinite {
            index: 0,
            pivot: 0.0,
        })?;
    let eig = SymmetricEigen::new(symmetrize(c));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let z = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or(Error::NotPositiveDefinite {
            index: 0,
            pivot: 0.0,
        })?;
    let mut vectors = DMatrix::from_fn(n, n, |r, c| d[r] * z[(r, c)]);
    // fix the sign so the largest-magnitude entry is positive
    for c in 0..n {
        let mut col = vectors.column_mut(c);
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(EigenPairs {
        values,
        vectors,
        b_orthonormal: true,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
