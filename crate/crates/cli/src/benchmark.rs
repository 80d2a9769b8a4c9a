use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use qtsvm::data::{self, Dataset, Example, LabelColumn};
use qtsvm::eval::{
    robustness_sweep, write_table, Cl1Trainer, CvSpec, LsqTrainer, ScalingScope, Selection, SweepTable, Trainer,
};
use qtsvm::rng;
use qtsvm::solver::cl1::{StartRule, StopRule};
use qtsvm::{LiftingMode, LsqConfig, SolverConfig};

use crate::generate::options;
use crate::manifest::{Clock, RunManifest};
use crate::{BenchmarkArgs, Cli, CliError, Method, NoiseReading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionKind {
    #[default]
    Nested,
    Flat,
}

/// Solver settings shared by every grid point. Unset fields keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub conv_tol: Option<f64>,
    pub weight_floor: Option<f64>,
    pub start: Option<StartRule>,
    pub stop_rule: Option<StopRule>,
    pub lsq_ridge: Option<f64>,
}

/// One dataset: either a synthetic example or a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub example: Option<u32>,
    /// Samples per class for examples.
    pub m: Option<usize>,
    pub noise_reading: Option<NoiseReading>,
    pub theta_pos: Option<[f64; 2]>,
    /// CSV path, relative to the config file.
    pub path: Option<PathBuf>,
    pub label_column: Option<String>,
    pub positive_label: Option<String>,
}

fn default_folds() -> usize {
    5
}

fn default_repeats() -> usize {
    2
}

fn default_inner() -> usize {
    5
}

fn default_ratios() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub methods: Vec<Method>,
    #[serde(default = "default_ratios")]
    pub noise_ratios: Vec<f64>,
    /// Grid axis; defaults to powers of ten from 1e-5 to 1e5.
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub mode: LiftingMode,
    #[serde(default)]
    pub selection: SelectionKind,
    #[serde(default = "default_inner")]
    pub inner_folds: usize,
    #[serde(default)]
    pub scaling: ScalingScope,
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub solver: SolverSection,
    pub datasets: Vec<DatasetSpec>,
}

impl BenchmarkConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::usage(format!("benchmark config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::usage("benchmark config: `methods` is empty"));
        }
        if self.datasets.is_empty() {
            return Err(CliError::usage("benchmark config: `datasets` is empty"));
        }
        if self.noise_ratios.is_empty() {
            return Err(CliError::usage("benchmark config: `noise_ratios` is empty"));
        }
        if let Some(r) = self.noise_ratios.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(CliError::usage(format!(
                "benchmark config: noise ratio {r} is outside [0, 1)"
            )));
        }
        for d in &self.datasets {
            match (d.example, &d.path) {
                (Some(e), None) if (1..=3).contains(&e) => {}
                (Some(e), None) => {
                    return Err(CliError::usage(format!("dataset {:?}: unknown example {e}", d.name)));
                }
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::usage(format!(
                        "dataset {:?}: give exactly one of `example` or `path`",
                        d.name
                    )))
                }
            }
        }
        self.cv_spec()
            .validate()
            .map_err(|e| CliError::usage(format!("benchmark config: {e}")))?;
        self.solver_config()
            .validate()
            .map_err(|e| CliError::usage(format!("benchmark config: {e}")))?;
        Ok(())
    }

    pub fn cv_spec(&self) -> CvSpec {
        CvSpec {
            folds: self.folds,
            repeats: self.repeats,
            seed: self.seed,
            grid: self.grid.clone().unwrap_or_else(CvSpec::default_grid),
            mode: self.mode,
            selection: match self.selection {
                SelectionKind::Nested => Selection::Nested {
                    inner_folds: self.inner_folds,
                },
                SelectionKind::Flat => Selection::Flat,
            },
            scaling: self.scaling,
            timing: self.timing,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        let s = &self.solver;
        SolverConfig {
            cap_eps: s.eps.unwrap_or(d.cap_eps),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            conv_tol: s.conv_tol.unwrap_or(d.conv_tol),
            weight_floor: s.weight_floor.unwrap_or(d.weight_floor),
            start: s.start.unwrap_or(d.start),
            stop_rule: s.stop_rule.unwrap_or(d.stop_rule),
            ..d
        }
    }

    pub fn lsq_config(&self) -> LsqConfig {
        let d = LsqConfig::default();
        LsqConfig {
            ridge: self.solver.lsq_ridge.unwrap_or(d.ridge),
            ..d
        }
    }

    fn load_datasets(&self, base: &Path) -> anyhow::Result<Vec<(String, Dataset)>> {
        self.datasets
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let d = match (spec.example, &spec.path) {
                    (Some(e), _) => {
                        let example = Example::from_index(e)?;
                        let opts = options(
                            example,
                            spec.noise_reading.unwrap_or(NoiseReading::Std),
                            spec.theta_pos.as_ref().map(|t| &t[..]),
                        );
                        let seed = rng::derive_seed(self.seed, "dataset", i as u64);
                        data::generate(example, spec.m.unwrap_or(200), seed, &opts)?
                    }
                    (None, Some(p)) => {
                        let path = base.join(p);
                        let column: LabelColumn = spec
                            .label_column
                            .as_deref()
                            .unwrap_or("last")
                            .parse()
                            .expect("label column parsing is infallible");
                        data::load_csv(&path, &column, spec.positive_label.as_deref().unwrap_or("1"))?
                    }
                    (None, None) => unreachable!("checked when parsing"),
                };
                Ok((spec.name.clone(), d))
            })
            .collect()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn write_summary(table: &SweepTable, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "dataset",
        "method",
        "noise_ratio",
        "acc_mean",
        "acc_std",
        "f1_mean",
        "f1_std",
        "c1",
        "c2",
    ])?;
    for e in &table.entries {
        let r = &e.result;
        w.write_record([
            e.dataset.clone(),
            r.method.clone(),
            e.noise_ratio.to_string(),
            r.accuracy.mean.to_string(),
            r.accuracy.std.to_string(),
            r.f1.mean.to_string(),
            r.f1.std.to_string(),
            r.best.c1.to_string(),
            fmt_opt(r.best.c2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(a: &BenchmarkArgs, cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let clock = Clock::start();
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", a.config.display())))?;
    let mut cfg = BenchmarkConfig::parse(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = a.folds {
        cfg.folds = f;
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    if let Some(m) = a.mode {
        cfg.mode = m.into();
    }
    if let Some(e) = a.eps {
        cfg.solver.eps = Some(e);
    }
    if let Some(t) = a.max_iter {
        cfg.solver.max_iter = Some(t);
    }
    cfg.check()?;

    let base = a.config.parent().unwrap_or(Path::new("."));
    let datasets = cfg.load_datasets(base)?;
    let cl1 = Cl1Trainer {
        base: cfg.solver_config(),
    };
    let lsq = LsqTrainer { base: cfg.lsq_config() };
    let trainers: Vec<&dyn Trainer> = cfg
        .methods
        .iter()
        .map(|m| match m {
            Method::Cl1qtsvm => &cl1 as &dyn Trainer,
            Method::Lsqtsvm => &lsq as &dyn Trainer,
        })
        .collect();
    let table = robustness_sweep(&datasets, &trainers, &cfg.noise_ratios, &cfg.cv_spec())?;

    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let results = a.out_dir.join("results.csv");
    let summary = a.out_dir.join("summary.csv");
    write_table(&table, &results)?;
    write_summary(&table, &summary)?;

    println!(
        "{:<16} {:<10} {:>6} {:>16} {:>16}  best",
        "dataset", "method", "noise", "acc", "f1"
    );
    for e in &table.entries {
        let r = &e.result;
        println!(
            "{:<16} {:<10} {:>6} {:>8.2} ±{:>6.2} {:>8.2} ±{:>6.2}  c1={} c2={}",
            e.dataset,
            r.method,
            e.noise_ratio,
            100.0 * r.accuracy.mean,
            100.0 * r.accuracy.std,
            100.0 * r.f1.mean,
            100.0 * r.f1.std,
            r.best.c1,
            r.best.c2.map_or_else(|| "-".to_string(), |c| c.to_string())
        );
    }
    println!("results written to {}", a.out_dir.display());
    RunManifest::new("benchmark", argv, &cfg, cfg.seed, &clock, vec![results, summary])?
        .save(&a.out_dir.join("manifest.json"))?;
    Ok(())
}
