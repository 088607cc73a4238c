//! Linear algebra kernels: sparse SPD solves and dense generalized
//! eigenproblems, both residual-checked.

pub mod cholesky;
pub mod eigen;
pub mod sparse;

use nalgebra::{DMatrix, DVector};

pub use cholesky::{spd_solve, SparseCholesky};
pub use eigen::{generalized_eig, EigenPairs};
pub use sparse::{CsrMatrix, TripletBuilder};

use crate::error::{Error, Result};

/// Dense SPD solve with one refinement step; relative residual must be
/// at most `1e-10`.
pub fn dense_spd_solve(k: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(DVector::zeros(b.len()));
    }
    let chol = k.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        index: 0,
        pivot: f64::NAN,
    })?;
    let mut x = chol.solve(b);
    let r = b - k * &x;
    x += chol.solve(&r);
    let rel = (b - k * &x).norm() / bnorm;
    if rel > 1e-10 {
        return Err(Error::NotConverged { residual: rel });
    }
    Ok(x)
}

/// Cosines of the principal angles between the column spans of `x` and `y`,
/// sorted descending. Columns need not be orthonormal.
pub fn principal_angle_cosines(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let qx = x.clone().qr().q();
    let qy = y.clone().qr().q();
    let s = (qx.transpose() * qy).singular_values();
    let mut v: Vec<f64> = s.iter().map(|c| c.min(1.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Largest principal angle (radians) between the two column spans.
pub fn max_principal_angle(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    // sin of the largest angle via the projection residual is better
    // conditioned than acos of a cosine near 1
    let qx = x.clone().qr().q();
    let qy = y.clone().qr().q();
    let resid = &qy - &qx * (qx.transpose() * &qy);
    let s = resid.singular_values();
    s.iter().fold(0.0f64, |m, v| m.max(*v)).min(1.0).asin()
}
