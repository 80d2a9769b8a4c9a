use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub(crate) type Chol = Cholesky<f64, Dyn>;

pub(crate) fn cholesky(a: DMatrix<f64>, what: &str) -> Result<Chol> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(format!("{what}: matrix has non-finite entries")));
    }
    Cholesky::new(a).ok_or_else(|| Error::numeric(format!("{what}: matrix is not positive definite")))
}

/// One block of a weighted ridge least-squares problem: columns of `z` are
/// samples, `weights[i]` scales sample `i`'s squared residual `(z_iᵀw − target)²`.
pub(crate) struct WeightedBlock<'a> {
    pub z: &'a DMatrix<f64>,
    pub weights: &'a DVector<f64>,
    pub scale: f64,
    pub target: f64,
}

/// Minimizes `½ Σ_blocks scale·Σ_i weights_i (z_iᵀw − target)² + ½ ridge‖w‖²`
/// by Householder QR of the stacked square-root system.
///
/// The minimizer is the solution of the normal equations
/// `(Σ scale·Z W Zᵀ + ridge·I) w = Σ scale·target·Z W e`, but QR works with
/// the square root of their condition number, which matters when weights span
/// twenty orders of magnitude.
pub(crate) fn weighted_ridge_lstsq(blocks: &[WeightedBlock<'_>], ridge: f64, what: &str) -> Result<DVector<f64>> {
    let dim = blocks.first().map(|b| b.z.nrows()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.z.ncols()).sum::<usize>() + dim;
    let mut a = DMatrix::zeros(rows, dim);
    let mut y = DVector::zeros(rows);
    let mut r = 0;
    for b in blocks {
        for (i, col) in b.z.column_iter().enumerate() {
            let s = (b.scale * b.weights[i]).sqrt();
            for k in 0..dim {
                a[(r, k)] = s * col[k];
            }
            y[r] = s * b.target;
            r += 1;
        }
    }
    let sr = ridge.sqrt();
    for k in 0..dim {
        a[(r + k, k)] = sr;
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(format!("{what}: system has non-finite entries")));
    }
    let qr = a.qr();
    let qty = qr.q().tr_mul(&y);
    qr.r()
        .solve_upper_triangular(&qty)
        .filter(all_finite)
        .ok_or_else(|| Error::numeric(format!("{what}: triangular factor is singular")))
}

/// `Z · diag(d) · Zᵀ`.
pub(crate) fn weighted_gram(z: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut zd = z.clone();
    for (mut col, &w) in zd.column_iter_mut().zip(d.iter()) {
        col *= w;
    }
    zd * z.transpose()
}

/// `Z · diag(d) · 1`.
pub(crate) fn weighted_sum(z: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    z * d
}

pub(crate) fn add_diagonal(a: &mut DMatrix<f64>, v: f64) {
    for i in 0..a.nrows() {
        a[(i, i)] += v;
    }
}

pub(crate) fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

pub(crate) fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
