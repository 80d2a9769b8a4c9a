//! Least-squares twin quadratic-surface baseline.
//!
//! With the equality constraints substituted, the positive surface minimizes
//! `½‖Z₊ᵀw‖² + C‖Z₋ᵀw + e‖²` and the negative surface `½‖Z₋ᵀw‖² + C‖e − Z₊ᵀw‖²`.
//! Both are solved through their normal equations with a small ridge, since
//! `Z Zᵀ` is singular whenever a class has fewer samples than lifted dimensions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NormalizationParams};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::TrainedModel;
use crate::quadvec::{self, LiftingMode};
use crate::solver::cl1::{lift_classes, Side, Subproblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqConfig {
    pub c: f64,
    pub ridge: f64,
}

impl Default for LsqConfig {
    fn default() -> Self {
        Self { c: 1.0, ridge: 1e-8 }
    }
}

impl LsqConfig {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid(format!("C must be positive and finite, got {}", self.c)));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::invalid(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// Normal-equation matrix and right-hand side for one side.
pub fn normal_equations(sp: &Subproblem<'_>, cfg: &LsqConfig) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = sp.own * sp.own.transpose() + sp.other * sp.other.transpose() * (2.0 * cfg.c);
    linalg::add_diagonal(&mut a, cfg.ridge);
    linalg::symmetrize(&mut a);
    let ones = DVector::from_element(sp.other.ncols(), 1.0);
    let rhs = sp.other * ones * (2.0 * cfg.c * sp.side.target());
    (a, rhs)
}

pub fn solve_side(zp: &DMatrix<f64>, zm: &DMatrix<f64>, side: Side, cfg: &LsqConfig) -> Result<DVector<f64>> {
    cfg.validate()?;
    let sp = Subproblem::new(zp, zm, side);
    let (a, rhs) = normal_equations(&sp, cfg);
    let chol = linalg::cholesky(a, "least-squares normal equations")?;
    let w = chol.solve(&rhs);
    if !linalg::all_finite(&w) {
        return Err(Error::numeric("least-squares solve produced non-finite weights"));
    }
    Ok(w)
}

/// Trains both surfaces; the scaler is fit to `d`.
pub fn fit_lsq(d: &Dataset, cfg: &LsqConfig, mode: LiftingMode) -> Result<TrainedModel> {
    let scaler = NormalizationParams::fit(d)?;
    fit_lsq_with_scaler(d, &scaler, cfg, mode)
}

pub fn fit_lsq_with_scaler(
    d: &Dataset,
    scaler: &NormalizationParams,
    cfg: &LsqConfig,
    mode: LiftingMode,
) -> Result<TrainedModel> {
    let scaled = scaler.apply_dataset(d)?;
    let (zp, zm) = lift_classes(&scaled, mode)?;
    if zp.ncols() == 0 || zm.ncols() == 0 {
        return Err(Error::invalid("both classes need at least one sample"));
    }
    let w_plus = solve_side(&zp, &zm, Side::Positive, cfg)?;
    let w_minus = solve_side(&zp, &zm, Side::Negative, cfg)?;
    let n = d.dim();
    TrainedModel::new(
        quadvec::unpack_weights(&w_plus, n, mode)?,
        quadvec::unpack_weights(&w_minus, n, mode)?,
        mode,
        scaler.clone(),
    )
}
