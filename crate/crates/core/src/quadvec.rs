//! Vectorization operators for quadratic surfaces.
//!
//! A quadratic surface `½xᵀWx + bᵀx + c` becomes a linear functional `w·z`
//! once the surface is packed into `w = [hvec(W); b; c]` and the sample is
//! lifted to `z = [lvec(x); x; 1]`. The reduced mode drops cross terms and
//! uses `dvec`/`qvec` instead, giving `2n + 1` coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadraticSurface;

/// Absolute tolerance for the symmetry and diagonality checks on user input.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LiftingMode {
    /// `hvec` paired with `lvec`: all monomials up to degree two.
    #[default]
    Full,
    /// `dvec` paired with `qvec`: squares only, no cross terms.
    Reduced,
}

impl LiftingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftingMode::Full => "full",
            LiftingMode::Reduced => "reduced",
        }
    }

    /// Number of quadratic-part coordinates for feature dimension `n`.
    pub fn quadratic_len(self, n: usize) -> usize {
        match self {
            LiftingMode::Full => n * (n + 1) / 2,
            LiftingMode::Reduced => n,
        }
    }

    /// Length of a lifted sample (and of a packed weight vector).
    pub fn lifted_len(self, n: usize) -> usize {
        self.quadratic_len(n) + n + 1
    }
}

impl std::str::FromStr for LiftingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(LiftingMode::Full),
            "reduced" => Ok(LiftingMode::Reduced),
            other => Err(Error::invalid(format!(
                "unknown lifting mode {other:?} (expected full or reduced)"
            ))),
        }
    }
}

impl std::fmt::Display for LiftingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sample mapped into lifted monomial space. The last entry is always 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSample {
    pub values: DVector<f64>,
    pub mode: LiftingMode,
}

/// Row-major upper-triangular index order shared by `hvec` and `lvec`.
///
/// Both operators must enumerate `(i, j)` identically or the contraction
/// `hvec(W)·lvec(x) = ½xᵀWx` breaks.
pub fn upper_triangle(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    Ok(a.nrows())
}

/// Semi-vectorization of a symmetric matrix: `[A11..A1n, A22..A2n, ..., Ann]`.
pub fn hvec(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = check_square(a)?;
    let asym = upper_triangle(n)
        .map(|(i, j)| (a[(i, j)] - a[(j, i)]).abs())
        .fold(0.0, f64::max);
    if !(asym <= STRUCTURE_TOL) {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (max |A_ij - A_ji| = {asym:e})"
        )));
    }
    Ok(DVector::from_iterator(
        n * (n + 1) / 2,
        upper_triangle(n).map(|(i, j)| a[(i, j)]),
    ))
}

/// Diagonal of a diagonal matrix.
pub fn dvec(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = check_square(a)?;
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].abs())
        .fold(0.0, f64::max);
    if !(off <= STRUCTURE_TOL) {
        return Err(Error::invalid(format!(
            "matrix is not diagonal (max off-diagonal |A_ij| = {off:e})"
        )));
    }
    Ok(a.diagonal())
}

/// Quadratic vectorization: squares halved, cross terms unhalved, `hvec` order.
pub fn lvec(x: &[f64]) -> Result<DVector<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::invalid("lvec of an empty vector"));
    }
    Ok(DVector::from_iterator(
        n * (n + 1) / 2,
        upper_triangle(n).map(|(i, j)| if i == j { 0.5 * x[i] * x[i] } else { x[i] * x[j] }),
    ))
}

/// Quadratic vectorization without cross terms: `[x1²/2, ..., xn²/2]`.
pub fn qvec(x: &[f64]) -> Result<DVector<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("qvec of an empty vector"));
    }
    Ok(DVector::from_iterator(x.len(), x.iter().map(|v| 0.5 * v * v)))
}

pub fn lift(x: &[f64], mode: LiftingMode) -> Result<LiftedSample> {
    let quad = match mode {
        LiftingMode::Full => lvec(x)?,
        LiftingMode::Reduced => qvec(x)?,
    };
    let values = DVector::from_iterator(
        mode.lifted_len(x.len()),
        quad.iter().chain(x.iter()).copied().chain(std::iter::once(1.0)),
    );
    Ok(LiftedSample { values, mode })
}

/// Lifts every row of `x` (`m × n`) and returns the `m_l × m` matrix whose
/// columns are the lifted samples.
pub fn lift_rows(x: &DMatrix<f64>, mode: LiftingMode) -> Result<DMatrix<f64>> {
    let (m, n) = x.shape();
    if n == 0 {
        return Err(Error::invalid("samples have zero features"));
    }
    let ml = mode.lifted_len(n);
    let mut z = DMatrix::zeros(ml, m);
    let mut row = vec![0.0; n];
    for r in 0..m {
        for (k, v) in row.iter_mut().enumerate() {
            *v = x[(r, k)];
        }
        z.set_column(r, &lift(&row, mode)?.values);
    }
    Ok(z)
}

/// Packs a surface into its lifted weight vector `[hvec(W) | dvec(W); b; c]`.
pub fn pack_weights(s: &QuadraticSurface, mode: LiftingMode) -> Result<DVector<f64>> {
    let quad = match mode {
        LiftingMode::Full => hvec(&s.w)?,
        LiftingMode::Reduced => dvec(&s.w)?,
    };
    let n = s.b.len();
    Ok(DVector::from_iterator(
        mode.lifted_len(n),
        quad.iter().chain(s.b.iter()).copied().chain(std::iter::once(s.c)),
    ))
}

/// Inverse of [`pack_weights`].
pub fn unpack_weights(w: &DVector<f64>, n: usize, mode: LiftingMode) -> Result<QuadraticSurface> {
    if n == 0 {
        return Err(Error::invalid("feature dimension must be at least 1"));
    }
    let expected = mode.lifted_len(n);
    if w.len() != expected {
        return Err(Error::invalid(format!(
            "weight vector has length {}, expected {expected} for n = {n} in {mode} mode",
            w.len()
        )));
    }
    let q = mode.quadratic_len(n);
    let mut mat = DMatrix::zeros(n, n);
    match mode {
        LiftingMode::Full => {
            for (k, (i, j)) in upper_triangle(n).enumerate() {
                mat[(i, j)] = w[k];
                mat[(j, i)] = w[k];
            }
        }
        LiftingMode::Reduced => {
            for i in 0..n {
                mat[(i, i)] = w[i];
            }
        }
    }
    let b = w.rows(q, n).into_owned();
    Ok(QuadraticSurface::from_parts(mat, b, w[expected - 1]))
}
