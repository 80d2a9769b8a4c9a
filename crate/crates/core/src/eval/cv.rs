use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, f1, Confusion};
use crate::data::{Dataset, NormalizationParams};
use crate::error::{Error, Result};
use crate::model::{Label, TrainedModel};
use crate::quadvec::LiftingMode;
use crate::rng;
use crate::solver::{cl1, lsq, LsqConfig, SolverConfig};

/// One grid point. `c2` is `None` for single-parameter methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub c1: f64,
    pub c2: Option<f64>,
}

/// A method the harness can train at a grid point.
pub trait Trainer: Sync {
    fn name(&self) -> &str;
    /// Grid points built from one axis of values.
    fn grid(&self, axis: &[f64]) -> Vec<Hyper>;
    fn train(&self, d: &Dataset, scaler: &NormalizationParams, h: Hyper, mode: LiftingMode) -> Result<TrainedModel>;
}

#[derive(Debug, Clone, Default)]
pub struct Cl1Trainer {
    pub base: SolverConfig,
}

impl Trainer for Cl1Trainer {
    fn name(&self) -> &str {
        "cl1qtsvm"
    }

    fn grid(&self, axis: &[f64]) -> Vec<Hyper> {
        axis.iter()
            .flat_map(|&c1| axis.iter().map(move |&c2| Hyper { c1, c2: Some(c2) }))
            .collect()
    }

    fn train(&self, d: &Dataset, scaler: &NormalizationParams, h: Hyper, mode: LiftingMode) -> Result<TrainedModel> {
        let c2 = h.c2.ok_or_else(|| Error::invalid("cl1qtsvm needs both c1 and c2"))?;
        let cfg = SolverConfig {
            c1: h.c1,
            c2,
            ..self.base.clone()
        };
        cl1::fit_with_scaler(d, scaler, &cfg, mode).map(|(m, _)| m)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LsqTrainer {
    pub base: LsqConfig,
}

impl Trainer for LsqTrainer {
    fn name(&self) -> &str {
        "lsqtsvm"
    }

    fn grid(&self, axis: &[f64]) -> Vec<Hyper> {
        axis.iter().map(|&c| Hyper { c1: c, c2: None }).collect()
    }

    fn train(&self, d: &Dataset, scaler: &NormalizationParams, h: Hyper, mode: LiftingMode) -> Result<TrainedModel> {
        let cfg = LsqConfig {
            c: h.c1,
            ..self.base.clone()
        };
        lsq::fit_lsq_with_scaler(d, scaler, &cfg, mode)
    }
}

/// How hyperparameters are chosen for each outer test fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Selection {
    /// Inner stratified CV on each outer training split.
    Nested { inner_folds: usize },
    /// One grid point for all folds: the best mean outer accuracy.
    Flat,
}

/// Which samples the min-max scaler is fit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingScope {
    /// Once, on the whole dataset handed to [`cross_validate`].
    #[default]
    Dataset,
    /// On each training split separately.
    TrainingSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSpec {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Axis values; two-parameter methods use its Cartesian square.
    pub grid: Vec<f64>,
    pub mode: LiftingMode,
    pub selection: Selection,
    pub scaling: ScalingScope,
    /// Record wall time per fold. Off by default so results are reproducible byte for byte.
    pub timing: bool,
}

impl Default for CvSpec {
    fn default() -> Self {
        Self {
            folds: 5,
            repeats: 2,
            seed: 0,
            grid: Self::default_grid(),
            mode: LiftingMode::Full,
            selection: Selection::Nested { inner_folds: 5 },
            scaling: ScalingScope::Dataset,
            timing: false,
        }
    }
}

impl CvSpec {
    /// `{10^i : i = −5..5}`.
    pub fn default_grid() -> Vec<f64> {
        (-5..=5).map(|i| 10f64.powi(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("need at least one repeat"));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("hyperparameter grid is empty"));
        }
        if let Some(v) = self.grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!(
                "grid values must be positive and finite, got {v}"
            )));
        }
        if let Selection::Nested { inner_folds } = self.selection {
            if inner_folds < 2 {
                return Err(Error::invalid(format!(
                    "need at least 2 inner folds, got {inner_folds}"
                )));
            }
        }
        Ok(())
    }
}

/// Mean and sample standard deviation. Any NaN input makes both NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub fold: usize,
    pub hyper: Hyper,
    pub counts: Confusion,
    pub accuracy: f64,
    pub f1: Option<f64>,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub method: String,
    pub accuracy: Summary,
    /// NaN when some test fold had an undefined F1.
    pub f1: Summary,
    /// Selected grid point; under nested selection the one chosen most often.
    pub best: Hyper,
    pub folds: Vec<FoldRecord>,
    pub seconds: Option<f64>,
}

/// Sample order used for folding and for building splits. Sorting by class
/// and content makes every split, and hence every result, independent of the
/// row order of the input.
fn canonical_order(d: &Dataset) -> Vec<usize> {
    let x = d.features();
    let mut idx: Vec<usize> = (0..d.len()).collect();
    let key = |i: usize| d.labels()[i] == Label::Negative;
    idx.sort_by(|&a, &b| {
        key(a).cmp(&key(b)).then_with(|| {
            (0..d.dim())
                .map(|j| x[(a, j)].total_cmp(&x[(b, j)]))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    idx
}

/// Fold index of every sample. Each class is shuffled and dealt round-robin.
pub fn stratified_folds(d: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let order = canonical_order(d);
    let mut fold = vec![0; d.len()];
    for (ci, label) in [Label::Positive, Label::Negative].into_iter().enumerate() {
        let mut members: Vec<usize> = order.iter().copied().filter(|&i| d.labels()[i] == label).collect();
        if members.len() < k {
            return Err(Error::invalid(format!(
                "{label:?} class has {} samples, fewer than the {k} folds requested; use at most {} folds",
                members.len(),
                members.len()
            )));
        }
        members.shuffle(&mut rng::stream(seed, "folds", ci as u64));
        for (j, i) in members.into_iter().enumerate() {
            fold[i] = j % k;
        }
    }
    Ok(fold)
}

struct Split {
    train: Dataset,
    test: Dataset,
}

fn splits(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Split>> {
    let fold = stratified_folds(d, k, seed)?;
    let order = canonical_order(d);
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| fold[i] == f);
            Split {
                train: d.subset(&train),
                test: d.subset(&test),
            }
        })
        .collect())
}

struct Ctx<'a> {
    trainer: &'a dyn Trainer,
    mode: LiftingMode,
    scaling: ScalingScope,
    global: &'a NormalizationParams,
}

impl Ctx<'_> {
    fn score(&self, split: &Split, h: Hyper) -> Result<Confusion> {
        let local;
        let scaler = match self.scaling {
            ScalingScope::Dataset => self.global,
            ScalingScope::TrainingSplit => {
                local = NormalizationParams::fit(&split.train)?;
                &local
            }
        };
        let model = self.trainer.train(&split.train, scaler, h, self.mode)?;
        let predicted = model.predict_rows(split.test.features())?;
        Confusion::from_predictions(split.test.labels(), &predicted)
    }

    fn record(&self, repeat: usize, fold: usize, split: &Split, h: Hyper, timing: bool) -> Result<FoldRecord> {
        let start = Instant::now();
        let counts = self.score(split, h)?;
        let seconds = timing.then(|| start.elapsed().as_secs_f64());
        Ok(FoldRecord {
            repeat,
            fold,
            hyper: h,
            counts,
            accuracy: accuracy(&counts)?,
            f1: f1(&counts)?,
            seconds,
        })
    }
}

/// Index of the largest finite score; the earliest grid point wins ties.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (g, &s) in scores.iter().enumerate() {
        if s.is_finite() && best.is_none_or(|b| s > scores[b]) {
            best = Some(g);
        }
    }
    best
}

/// Stratified k-fold cross-validation with grid search, repeated with derived seeds.
pub fn cross_validate(d: &Dataset, trainer: &dyn Trainer, spec: &CvSpec) -> Result<EvalResult> {
    spec.validate()?;
    let grid = trainer.grid(&spec.grid);
    if grid.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    let global = NormalizationParams::fit(d)?;
    let ctx = Ctx {
        trainer,
        mode: spec.mode,
        scaling: spec.scaling,
        global: &global,
    };
    let start = Instant::now();
    let outer: Vec<Vec<Split>> = (0..spec.repeats)
        .map(|r| splits(d, spec.folds, rng::derive_seed(spec.seed, "repeat", r as u64)))
        .collect::<Result<_>>()?;
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for r in 0..spec.repeats {
        for f in 0..spec.folds {
            cells.push((r, f));
        }
    }

    let (folds, best) = match spec.selection {
        Selection::Nested { inner_folds } => {
            let inner: Vec<Vec<Split>> = cells
                .iter()
                .map(|&(r, f)| {
                    let seed = rng::derive_seed(rng::derive_seed(spec.seed, "repeat", r as u64), "inner", f as u64);
                    splits(&outer[r][f].train, inner_folds, seed)
                })
                .collect::<Result<_>>()?;
            let tasks: Vec<(usize, usize, usize)> = (0..cells.len())
                .flat_map(|c| (0..grid.len()).flat_map(move |g| (0..inner_folds).map(move |i| (c, g, i))))
                .collect();
            let acc: Vec<f64> = tasks
                .par_iter()
                .map(|&(c, g, i)| {
                    ctx.score(&inner[c][i], grid[g])
                        .and_then(|counts| accuracy(&counts))
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let chosen: Vec<usize> = (0..cells.len())
                .map(|c| {
                    let scores: Vec<f64> = (0..grid.len())
                        .map(|g| {
                            let base = (c * grid.len() + g) * inner_folds;
                            acc[base..base + inner_folds].iter().sum::<f64>() / inner_folds as f64
                        })
                        .collect();
                    argmax(&scores).ok_or_else(|| Error::numeric("no grid point trained successfully"))
                })
                .collect::<Result<_>>()?;
            let folds: Vec<FoldRecord> = cells
                .par_iter()
                .zip(chosen.par_iter())
                .map(|(&(r, f), &g)| ctx.record(r, f, &outer[r][f], grid[g], spec.timing))
                .collect::<Result<_>>()?;
            let mut tally = vec![0usize; grid.len()];
            for &g in &chosen {
                tally[g] += 1;
            }
            let most = *tally.iter().max().expect("grid is nonempty");
            let best = grid[tally.iter().position(|&t| t == most).expect("max exists")];
            (folds, best)
        }
        Selection::Flat => {
            let tasks: Vec<(usize, usize)> = (0..grid.len())
                .flat_map(|g| (0..cells.len()).map(move |c| (g, c)))
                .collect();
            let records: Vec<Option<FoldRecord>> = tasks
                .par_iter()
                .map(|&(g, c)| {
                    let (r, f) = cells[c];
                    ctx.record(r, f, &outer[r][f], grid[g], spec.timing).ok()
                })
                .collect();
            let scores: Vec<f64> = records
                .chunks(cells.len())
                .map(|rs| {
                    rs.iter()
                        .map(|r| r.as_ref().map_or(f64::NAN, |r| r.accuracy))
                        .sum::<f64>()
                        / cells.len() as f64
                })
                .collect();
            let g = argmax(&scores).ok_or_else(|| Error::numeric("no grid point trained successfully"))?;
            let folds = records[g * cells.len()..(g + 1) * cells.len()]
                .iter()
                .map(|r| r.clone().expect("chosen grid point has finite accuracy on every fold"))
                .collect();
            (folds, grid[g])
        }
    };

    let accs: Vec<f64> = folds.iter().map(|r| r.accuracy).collect();
    let f1s: Vec<f64> = folds.iter().map(|r| r.f1.unwrap_or(f64::NAN)).collect();
    Ok(EvalResult {
        method: trainer.name().to_string(),
        accuracy: Summary::of(&accs),
        f1: Summary::of(&f1s),
        best,
        folds,
        seconds: spec.timing.then(|| start.elapsed().as_secs_f64()),
    })
}
