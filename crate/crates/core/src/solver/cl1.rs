//! Capped-L1 twin quadratic-surface trainer.
//!
//! Each surface solves
//!
//! ```text
//! min  Σ_own min(|w·z|, ε) + ½c₁‖w‖² + c₂ Σ_other min(|w·z − t|, ε)
//! ```
//!
//! where `t = −1` for the positive surface (the other class is pushed to
//! `w·z = −1`) and `t = +1` for the negative surface. The nonsmooth objective
//! is handled by reweighting: every iteration fixes diagonal weights from the
//! current residuals and solves the resulting weighted least-squares problem
//! in closed form, through the Sherman-Morrison-Woodbury identity when the
//! lifted dimension exceeds the other class size.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NormalizationParams};
use crate::error::{Error, Result};
use crate::linalg::{self, Chol, WeightedBlock};
use crate::model::TrainedModel;
use crate::quadvec::{self, LiftingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `‖w^{t+1} − w^t‖ ≤ tol·(1 + ‖w^t‖)`.
    #[default]
    WeightChange,
    /// `|J(w^{t+1}) − J(w^t)| ≤ tol·(1 + |J(w^t)|)` on the capped objective.
    ObjectiveChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub c1: f64,
    pub c2: f64,
    pub cap_eps: f64,
    pub conv_tol: f64,
    pub max_iter: usize,
    pub weight_floor: f64,
    #[serde(default)]
    pub stop_rule: StopRule,
    #[serde(default)]
    pub start: StartRule,
}

/// How the first reweighted step is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// Iterate from `w⁰ = 0`. With the division guard every own-class weight
    /// is then `1/weight_floor`, so the first update is crushed to nearly zero
    /// and the run usually stops after one step.
    Zero,
    /// Iterate from the solution of the unit-weight system (`Q = U = I`).
    #[default]
    UnitWeights,
}

/// Defaults `c1 = 1`, `c2 = 1e-5`. With the small cap a modest `c2/c1` keeps
/// the first iterate inside the cap on the training class; grid search is
/// still the way to pick them for real data.
impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1e-5,
            cap_eps: 1e-5,
            conv_tol: 1e-8,
            max_iter: 30,
            weight_floor: 1e-12,
            stop_rule: StopRule::WeightChange,
            start: StartRule::UnitWeights,
        }
    }
}

impl SolverConfig {
    pub fn with_params(c1: f64, c2: f64) -> Self {
        Self {
            c1,
            c2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("cap_eps", self.cap_eps),
            ("conv_tol", self.conv_tol),
            ("weight_floor", self.weight_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Which of the two surfaces a subproblem fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    /// Value the other class is pushed to on this side's surface.
    pub fn target(self) -> f64 {
        match self {
            Side::Positive => -1.0,
            Side::Negative => 1.0,
        }
    }
}

/// Diagonal reweighting matrices for one subproblem.
///
/// For the positive surface `own` is `Q` (over positives) and `other` is `U`
/// (over negatives); for the negative surface they are `F` and `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightState {
    pub own: DVector<f64>,
    pub other: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Smw,
    Direct,
}

impl Branch {
    /// SMW runs only when the lifted dimension strictly exceeds the other class size.
    pub fn select(lifted_dim: usize, other_count: usize) -> Self {
        if lifted_dim > other_count {
            Branch::Smw
        } else {
            Branch::Direct
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemReport {
    /// Capped objective at the starting iterate and after each update.
    pub objective_trace: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub positive: SubproblemReport,
    pub negative: SubproblemReport,
}

fn capped_weight(residual: f64, cfg: &SolverConfig) -> f64 {
    let a = residual.abs();
    if a <= cfg.cap_eps {
        1.0 / a.max(cfg.weight_floor)
    } else {
        cfg.cap_eps
    }
}

/// Lifted samples of one subproblem: `own` is the class the surface hugs.
pub struct Subproblem<'a> {
    pub own: &'a DMatrix<f64>,
    pub other: &'a DMatrix<f64>,
    pub side: Side,
}

impl<'a> Subproblem<'a> {
    pub fn new(zp: &'a DMatrix<f64>, zm: &'a DMatrix<f64>, side: Side) -> Self {
        match side {
            Side::Positive => Self {
                own: zp,
                other: zm,
                side,
            },
            Side::Negative => Self {
                own: zm,
                other: zp,
                side,
            },
        }
    }

    pub fn lifted_dim(&self) -> usize {
        self.own.nrows()
    }

    pub fn branch(&self) -> Branch {
        Branch::select(self.lifted_dim(), self.other.ncols())
    }

    fn residuals(&self, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let own = self.own.tr_mul(w);
        let t = self.side.target();
        let other = self.other.tr_mul(w).map(|v| v - t);
        (own, other)
    }

    pub fn weights(&self, w: &DVector<f64>, cfg: &SolverConfig) -> ReweightState {
        let (own, other) = self.residuals(w);
        ReweightState {
            own: own.map(|r| capped_weight(r, cfg)),
            other: other.map(|r| capped_weight(r, cfg)),
        }
    }

    pub fn objective(&self, w: &DVector<f64>, cfg: &SolverConfig) -> f64 {
        let (own, other) = self.residuals(w);
        let capped = |v: &DVector<f64>| v.iter().map(|r| r.abs().min(cfg.cap_eps)).sum::<f64>();
        capped(&own) + 0.5 * cfg.c1 * w.norm_squared() + cfg.c2 * capped(&other)
    }

    /// Gradient of the weighted quadratic model at `w`:
    /// `Z_o S Z_oᵀ w + c₁w + c₂ Z_x T (Z_xᵀ w − t)`.
    pub fn weighted_gradient(&self, w: &DVector<f64>, state: &ReweightState, cfg: &SolverConfig) -> DVector<f64> {
        let (own, other) = self.residuals(w);
        self.own * own.component_mul(&state.own) + w * cfg.c1 + self.other * other.component_mul(&state.other) * cfg.c2
    }

    /// Right-hand side `c₂·t·Z_x T e`.
    fn rhs(&self, state: &ReweightState, cfg: &SolverConfig) -> DVector<f64> {
        linalg::weighted_sum(self.other, &state.other) * (cfg.c2 * self.side.target())
    }

    /// Solves `(Z_o S Z_oᵀ + c₁I + c₂ Z_x T Z_xᵀ) w = c₂·t·Z_x T e`.
    pub fn solve_direct(&self, state: &ReweightState, cfg: &SolverConfig) -> Result<DVector<f64>> {
        let blocks = [
            WeightedBlock {
                z: self.own,
                weights: &state.own,
                scale: 1.0,
                target: 0.0,
            },
            WeightedBlock {
                z: self.other,
                weights: &state.other,
                scale: cfg.c2,
                target: self.side.target(),
            },
        ];
        linalg::weighted_ridge_lstsq(&blocks, cfg.c1, "direct reweighted system")
    }

    /// `M r` with `M = (Y⁻¹ + c₂ Z_x T Z_xᵀ)⁻¹` expanded by SMW, where
    /// `Y = (c₁I + Z_o S Z_oᵀ)⁻¹`.
    pub fn solve_smw(&self, state: &ReweightState, cfg: &SolverConfig) -> Result<DVector<f64>> {
        let y = InverseProximal::new(self.own, &state.own, cfg.c1)?;
        let r = self.rhs(state, cfg);
        let y_zx = y.apply(self.other);
        let mut s = self.other.tr_mul(&y_zx);
        for (j, &t) in state.other.iter().enumerate() {
            s[(j, j)] += 1.0 / (cfg.c2 * t);
        }
        linalg::symmetrize(&mut s);
        let s = linalg::cholesky(s, "SMW capacitance system")?;
        let yr = y.apply_vec(&r);
        let inner = s.solve(&y_zx.tr_mul(&r));
        Ok(yr - y_zx * inner)
    }

    pub fn update(&self, state: &ReweightState, cfg: &SolverConfig) -> Result<DVector<f64>> {
        match self.branch() {
            Branch::Smw => self.solve_smw(state, cfg),
            Branch::Direct => self.solve_direct(state, cfg),
        }
    }

    pub fn run(&self, cfg: &SolverConfig) -> Result<(DVector<f64>, SubproblemReport)> {
        cfg.validate()?;
        let mut w = match cfg.start {
            StartRule::Zero => DVector::zeros(self.lifted_dim()),
            StartRule::UnitWeights => {
                let unit = ReweightState {
                    own: DVector::from_element(self.own.ncols(), 1.0),
                    other: DVector::from_element(self.other.ncols(), 1.0),
                };
                self.update(&unit, cfg).map_err(|e| e.at_iteration(0))?
            }
        };
        let mut trace = vec![self.objective(&w, cfg)];
        let mut converged = false;
        let mut iterations = 0;
        for t in 0..cfg.max_iter {
            let state = self.weights(&w, cfg);
            let next = self.update(&state, cfg).map_err(|e| e.at_iteration(t))?;
            if !linalg::all_finite(&next) {
                return Err(Error::numeric("update produced non-finite weights").at_iteration(t));
            }
            let obj = self.objective(&next, cfg);
            let prev_obj = *trace.last().expect("trace starts non-empty");
            trace.push(obj);
            iterations = t + 1;
            let done = match cfg.stop_rule {
                StopRule::WeightChange => (&next - &w).norm() <= cfg.conv_tol * (1.0 + w.norm()),
                StopRule::ObjectiveChange => (obj - prev_obj).abs() <= cfg.conv_tol * (1.0 + prev_obj.abs()),
            };
            w = next;
            if done {
                converged = true;
                break;
            }
        }
        Ok((
            w,
            SubproblemReport {
                objective_trace: trace,
                iterations_used: iterations,
                converged,
                branch: self.branch(),
            },
        ))
    }
}

/// The operator `Y = (c₁I + Z S Zᵀ)⁻¹`, applied through whichever system is smaller:
/// the `m × m` inner system `c₁S⁻¹ + ZᵀZ` when `m < m_l`, else the `m_l × m_l` one.
enum InverseProximal<'a> {
    Inner { z: &'a DMatrix<f64>, k: Chol, c1: f64 },
    Dense(Chol),
}

impl<'a> InverseProximal<'a> {
    fn new(z: &'a DMatrix<f64>, s: &DVector<f64>, c1: f64) -> Result<Self> {
        if z.ncols() < z.nrows() {
            let mut k = z.tr_mul(z);
            for (i, &si) in s.iter().enumerate() {
                k[(i, i)] += c1 / si;
            }
            linalg::symmetrize(&mut k);
            Ok(Self::Inner {
                z,
                k: linalg::cholesky(k, "SMW inner system")?,
                c1,
            })
        } else {
            let mut a = linalg::weighted_gram(z, s);
            linalg::add_diagonal(&mut a, c1);
            linalg::symmetrize(&mut a);
            Ok(Self::Dense(linalg::cholesky(a, "proximal system")?))
        }
    }

    fn apply(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Self::Inner { z, k, c1 } => (v - *z * k.solve(&z.tr_mul(v))) / *c1,
            Self::Dense(chol) => chol.solve(v),
        }
    }

    fn apply_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Inner { z, k, c1 } => (v - *z * k.solve(&z.tr_mul(v))) / *c1,
            Self::Dense(chol) => chol.solve(v),
        }
    }
}

/// Weights `(Q, U)` of the positive-surface subproblem at `w₊`.
pub fn compute_weights_pos(
    w_plus: &DVector<f64>,
    zp: &DMatrix<f64>,
    zm: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> ReweightState {
    Subproblem::new(zp, zm, Side::Positive).weights(w_plus, cfg)
}

/// Weights `(F, G)` of the negative-surface subproblem at `w₋`.
pub fn compute_weights_neg(
    w_minus: &DVector<f64>,
    zp: &DMatrix<f64>,
    zm: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> ReweightState {
    Subproblem::new(zp, zm, Side::Negative).weights(w_minus, cfg)
}

pub fn update_w_plus(
    zp: &DMatrix<f64>,
    zm: &DMatrix<f64>,
    state: &ReweightState,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    Subproblem::new(zp, zm, Side::Positive).update(state, cfg)
}

pub fn update_w_minus(
    zp: &DMatrix<f64>,
    zm: &DMatrix<f64>,
    state: &ReweightState,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    Subproblem::new(zp, zm, Side::Negative).update(state, cfg)
}

pub fn objective_pos(w_plus: &DVector<f64>, zp: &DMatrix<f64>, zm: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    Subproblem::new(zp, zm, Side::Positive).objective(w_plus, cfg)
}

pub fn objective_neg(w_minus: &DVector<f64>, zp: &DMatrix<f64>, zm: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    Subproblem::new(zp, zm, Side::Negative).objective(w_minus, cfg)
}

/// Output of [`fit_lifted`]: both packed weight vectors and the run report.
#[derive(Debug, Clone)]
pub struct LiftedFit {
    pub w_plus: DVector<f64>,
    pub w_minus: DVector<f64>,
    pub report: FitReport,
}

/// Runs both subproblems on already lifted samples (columns of `zp`, `zm`).
pub fn fit_lifted(zp: &DMatrix<f64>, zm: &DMatrix<f64>, cfg: &SolverConfig) -> Result<LiftedFit> {
    cfg.validate()?;
    if zp.ncols() == 0 || zm.ncols() == 0 {
        return Err(Error::invalid("both classes need at least one sample"));
    }
    let (pos, neg) = rayon::join(
        || Subproblem::new(zp, zm, Side::Positive).run(cfg),
        || Subproblem::new(zp, zm, Side::Negative).run(cfg),
    );
    let (w_plus, positive) = pos?;
    let (w_minus, negative) = neg?;
    Ok(LiftedFit {
        w_plus,
        w_minus,
        report: FitReport { positive, negative },
    })
}

pub(crate) fn lift_classes(d: &Dataset, mode: LiftingMode) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    Ok((
        quadvec::lift_rows(&d.x_pos(), mode)?,
        quadvec::lift_rows(&d.x_neg(), mode)?,
    ))
}

/// Trains on `d` after fitting a `[-1, 1]` scaler to it.
pub fn fit(d: &Dataset, cfg: &SolverConfig, mode: LiftingMode) -> Result<(TrainedModel, FitReport)> {
    let scaler = NormalizationParams::fit(d)?;
    fit_with_scaler(d, &scaler, cfg, mode)
}

/// Trains on raw samples `d` using a given scaler; the scaler is stored in the model.
pub fn fit_with_scaler(
    d: &Dataset,
    scaler: &NormalizationParams,
    cfg: &SolverConfig,
    mode: LiftingMode,
) -> Result<(TrainedModel, FitReport)> {
    let scaled = scaler.apply_dataset(d)?;
    let (zp, zm) = lift_classes(&scaled, mode)?;
    let fitted = fit_lifted(&zp, &zm, cfg)?;
    let n = d.dim();
    let model = TrainedModel::new(
        quadvec::unpack_weights(&fitted.w_plus, n, mode)?,
        quadvec::unpack_weights(&fitted.w_minus, n, mode)?,
        mode,
        scaler.clone(),
    )?;
    Ok((model, fitted.report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lifted(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
        let x = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        quadvec::lift_rows(&x, LiftingMode::Full).unwrap()
    }

    fn cfg(c1: f64, c2: f64) -> SolverConfig {
        SolverConfig::with_params(c1, c2)
    }

    /// Literal case analysis of the weight rule, written independently of `capped_weight`.
    fn oracle_weight(abs_residual: f64, eps: f64, floor: f64) -> f64 {
        if abs_residual <= eps {
            if abs_residual < floor {
                1.0 / floor
            } else {
                1.0 / abs_residual
            }
        } else {
            eps
        }
    }

    #[test]
    fn zero_init_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zp = random_lifted(&mut rng, 5, 2);
        let zm = random_lifted(&mut rng, 4, 2);
        let c = SolverConfig {
            cap_eps: 1e-8,
            ..cfg(1.0, 1.0)
        };
        let s = compute_weights_pos(&DVector::zeros(6), &zp, &zm, &c);
        assert!(s.own.iter().all(|&q| q == 1.0 / c.weight_floor));
        assert!(s.other.iter().all(|&u| u == c.cap_eps));
    }

    #[test]
    fn weight_at_cap_boundary_takes_reciprocal_branch() {
        let c = SolverConfig {
            cap_eps: 0.25,
            ..cfg(1.0, 1.0)
        };
        // one positive sample lifted to [0, 0, 1]; w·z = c_+ = 0.25 = ε
        let zp = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let zm = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let w = DVector::from_vec(vec![0.0, 0.0, 0.25]);
        let s = compute_weights_pos(&w, &zp, &zm, &c);
        assert_eq!(s.own[0], 4.0);
        // η = 1 + 0.25 > ε
        assert_eq!(s.other[0], 0.25);
    }

    #[test]
    fn weights_match_literal_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let zp = random_lifted(&mut rng, 7, 2);
            let zm = random_lifted(&mut rng, 6, 2);
            let w = DVector::from_fn(6, |_, _| rng.random_range(-1e-4..1e-4));
            let c = SolverConfig {
                cap_eps: 1e-4,
                ..cfg(1.0, 1.0)
            };
            let s = compute_weights_pos(&w, &zp, &zm, &c);
            for i in 0..7 {
                let r = zp.column(i).dot(&w);
                assert_eq!(s.own[i], oracle_weight(r.abs(), c.cap_eps, c.weight_floor));
            }
            for j in 0..6 {
                let eta = 1.0 + zm.column(j).dot(&w);
                assert_eq!(s.other[j], oracle_weight(eta.abs(), c.cap_eps, c.weight_floor));
            }
            let f = compute_weights_neg(&w, &zp, &zm, &c);
            for j in 0..6 {
                let r = zm.column(j).dot(&w);
                assert_eq!(f.own[j], oracle_weight(r.abs(), c.cap_eps, c.weight_floor));
            }
            for i in 0..7 {
                let eta = 1.0 - zp.column(i).dot(&w);
                assert_eq!(f.other[i], oracle_weight(eta.abs(), c.cap_eps, c.weight_floor));
            }
        }
    }

    #[test]
    fn vanishing_penalty_gives_zero_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zp = random_lifted(&mut rng, 5, 2);
        let zm = random_lifted(&mut rng, 5, 2);
        let state = ReweightState {
            own: DVector::from_element(5, 2.0),
            other: DVector::from_element(5, 3.0),
        };
        let c = cfg(1.0, 1e-300);
        assert!(update_w_plus(&zp, &zm, &state, &c).unwrap().norm() < 1e-290);
        assert!(update_w_minus(&zp, &zm, &state, &c).unwrap().norm() < 1e-290);
    }

    fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn branches_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (mp, mm) in [(5, 5), (4, 3), (4, 8), (8, 4), (10, 2)] {
            let zp = random_lifted(&mut rng, mp, 2);
            let zm = random_lifted(&mut rng, mm, 2);
            let c = cfg(0.7, 2.0);
            for side in [Side::Positive, Side::Negative] {
                let sp = Subproblem::new(&zp, &zm, side);
                let state = ReweightState {
                    own: DVector::from_fn(sp.own.ncols(), |_, _| rng.random_range(0.1..10.0)),
                    other: DVector::from_fn(sp.other.ncols(), |_, _| rng.random_range(0.1..10.0)),
                };
                let a = sp.solve_direct(&state, &c).unwrap();
                let b = sp.solve_smw(&state, &c).unwrap();
                assert!(rel_diff(&a, &b) <= 1e-8, "{side:?} {mp}/{mm}: {}", rel_diff(&a, &b));
            }
        }
    }

    #[test]
    fn update_is_stationary_for_weighted_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zp = random_lifted(&mut rng, 9, 3);
        let zm = random_lifted(&mut rng, 4, 3);
        let c = cfg(0.3, 5.0);
        for side in [Side::Positive, Side::Negative] {
            let sp = Subproblem::new(&zp, &zm, side);
            let state = ReweightState {
                own: DVector::from_fn(sp.own.ncols(), |_, _| rng.random_range(0.1..10.0)),
                other: DVector::from_fn(sp.other.ncols(), |_, _| rng.random_range(0.1..10.0)),
            };
            let w = sp.update(&state, &c).unwrap();
            let g = sp.weighted_gradient(&w, &state, &c);
            assert!(g.norm() <= 1e-6 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn label_swap_mirrors_the_two_subproblems() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let zp = random_lifted(&mut rng, 6, 2);
        let zm = random_lifted(&mut rng, 7, 2);
        let c = cfg(0.5, 3.0);
        let state = ReweightState {
            own: DVector::from_fn(7, |_, _| rng.random_range(0.1..10.0)),
            other: DVector::from_fn(6, |_, _| rng.random_range(0.1..10.0)),
        };
        // w₋ on (Z₊, Z₋) equals −w₊ on the swapped data (Z₋ as positives)
        let w_minus = update_w_minus(&zp, &zm, &state, &c).unwrap();
        let w_plus_swapped = update_w_plus(&zm, &zp, &state, &c).unwrap();
        assert!(rel_diff(&w_minus, &(-w_plus_swapped)) <= 1e-12);
    }

    #[test]
    fn objective_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zp = random_lifted(&mut rng, 5, 2);
        let zm = random_lifted(&mut rng, 8, 2);
        let c = cfg(2.0, 3.0);
        let zero = DVector::zeros(6);
        assert_eq!(objective_pos(&zero, &zp, &zm, &c), 3.0 * 8.0 * c.cap_eps);
        assert_eq!(objective_neg(&zero, &zp, &zm, &c), 3.0 * 5.0 * c.cap_eps);

        let w = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let doubled = SolverConfig { c1: 4.0, ..c.clone() };
        let gap = objective_pos(&w, &zp, &zm, &doubled) - objective_pos(&w, &zp, &zm, &c);
        assert!((gap - 0.5 * 2.0 * w.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn huge_cap_matches_uncapped_l1() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let zp = random_lifted(&mut rng, 5, 2);
        let zm = random_lifted(&mut rng, 8, 2);
        let c = SolverConfig {
            cap_eps: 1e300,
            ..cfg(2.0, 3.0)
        };
        let w = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let l1_own: f64 = (0..5).map(|i| zp.column(i).dot(&w).abs()).sum();
        let l1_other: f64 = (0..8).map(|j| (1.0 + zm.column(j).dot(&w)).abs()).sum();
        let oracle = l1_own + 0.5 * 2.0 * w.norm_squared() + 3.0 * l1_other;
        assert!((objective_pos(&w, &zp, &zm, &c) - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn branch_selection_is_strict() {
        assert_eq!(Branch::select(6, 5), Branch::Smw);
        assert_eq!(Branch::select(6, 6), Branch::Direct);
        assert_eq!(Branch::select(6, 7), Branch::Direct);
    }

    #[test]
    fn fit_rejects_empty_class_and_bad_config() {
        let zp = DMatrix::zeros(6, 3);
        let zm = DMatrix::zeros(6, 0);
        assert!(matches!(
            fit_lifted(&zp, &zm, &cfg(1.0, 1.0)),
            Err(Error::InvalidInput(_))
        ));
        assert!(cfg(0.0, 1.0).validate().is_err());
        assert!(SolverConfig {
            max_iter: 0,
            ..cfg(1.0, 1.0)
        }
        .validate()
        .is_err());
    }
}
