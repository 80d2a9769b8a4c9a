use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvSpec, EvalResult, Trainer};
use crate::data::{inject_label_noise, Dataset};
use crate::error::{Error, Result};
use crate::rng;

pub const TABLE_HEADER: [&str; 10] = [
    "dataset",
    "method",
    "noise_ratio",
    "fold",
    "repeat",
    "c1",
    "c2",
    "acc",
    "f1",
    "seconds",
];

/// One test fold of one (dataset, noise ratio, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub method: String,
    pub noise_ratio: f64,
    pub fold: usize,
    pub repeat: usize,
    pub c1: f64,
    pub c2: Option<f64>,
    pub acc: f64,
    pub f1: Option<f64>,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub dataset: String,
    pub noise_ratio: f64,
    pub result: EvalResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub entries: Vec<SweepEntry>,
}

impl SweepTable {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.entries
            .iter()
            .flat_map(|e| {
                e.result.folds.iter().map(move |f| SweepRow {
                    dataset: e.dataset.clone(),
                    method: e.result.method.clone(),
                    noise_ratio: e.noise_ratio,
                    fold: f.fold,
                    repeat: f.repeat,
                    c1: f.hyper.c1,
                    c2: f.hyper.c2,
                    acc: f.accuracy,
                    f1: f.f1,
                    seconds: f.seconds,
                })
            })
            .collect()
    }

    pub fn get(&self, dataset: &str, method: &str, noise_ratio: f64) -> Option<&EvalResult> {
        self.entries
            .iter()
            .find(|e| e.dataset == dataset && e.result.method == method && e.noise_ratio == noise_ratio)
            .map(|e| &e.result)
    }
}

/// Cross-validates every trainer on every dataset at every label-noise ratio.
///
/// Noise for dataset `d` at ratio index `r` is drawn from a stream derived
/// from `(spec.seed, d, r)`, so all methods see the same corrupted labels.
pub fn robustness_sweep(
    datasets: &[(String, Dataset)],
    trainers: &[&dyn Trainer],
    noise_ratios: &[f64],
    spec: &CvSpec,
) -> Result<SweepTable> {
    if trainers.is_empty() {
        return Err(Error::invalid("no methods to evaluate"));
    }
    if noise_ratios.is_empty() {
        return Err(Error::invalid("no noise ratios given"));
    }
    let mut entries = Vec::new();
    for (di, (name, d)) in datasets.iter().enumerate() {
        for (ri, &ratio) in noise_ratios.iter().enumerate() {
            let seed = rng::derive_seed(
                rng::derive_seed(spec.seed, "label-noise", di as u64),
                "ratio",
                ri as u64,
            );
            let noisy = inject_label_noise(d, ratio, seed)?;
            for t in trainers {
                entries.push(SweepEntry {
                    dataset: name.clone(),
                    noise_ratio: ratio,
                    result: cross_validate(&noisy, *t, spec)?,
                });
            }
        }
    }
    Ok(SweepTable { entries })
}

fn opt(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), |x| x.to_string())
}

/// Writes the long-format table. Undefined F1 is written `NaN`; a missing
/// `c2` or timing is left empty.
pub fn write_table(table: &SweepTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(TABLE_HEADER).map_err(csv_err)?;
    for r in table.rows() {
        w.write_record([
            r.dataset,
            r.method,
            r.noise_ratio.to_string(),
            r.fold.to_string(),
            r.repeat.to_string(),
            r.c1.to_string(),
            opt(r.c2, ""),
            r.acc.to_string(),
            opt(r.f1, "NaN"),
            opt(r.seconds, ""),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_example1;
    use crate::eval::{Cl1Trainer, LsqTrainer, Selection};

    fn spec() -> CvSpec {
        CvSpec {
            folds: 2,
            repeats: 1,
            seed: 11,
            grid: vec![1e-1, 1e1],
            selection: Selection::Nested { inner_folds: 2 },
            ..CvSpec::default()
        }
    }

    #[test]
    fn zero_ratio_matches_plain_cross_validation() {
        let d = gen_example1(12, 3).unwrap();
        let cl1 = Cl1Trainer::default();
        let table = robustness_sweep(&[("ex1".into(), d.clone())], &[&cl1], &[0.0], &spec()).unwrap();
        assert_eq!(
            table.get("ex1", "cl1qtsvm", 0.0).unwrap(),
            &cross_validate(&d, &cl1, &spec()).unwrap()
        );
    }

    #[test]
    fn table_layout() {
        let d = gen_example1(10, 4).unwrap();
        let (cl1, lsq) = (Cl1Trainer::default(), LsqTrainer::default());
        let table = robustness_sweep(&[("ex1".into(), d)], &[&cl1, &lsq], &[0.0, 0.1], &spec()).unwrap();
        assert_eq!(table.entries.len(), 4);
        assert_eq!(table.rows().len(), 8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_table(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TABLE_HEADER.join(","));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&first[..3], ["ex1", "cl1qtsvm", "0"]);
        let lsq_row = text.lines().find(|l| l.contains("lsqtsvm")).unwrap();
        assert_eq!(lsq_row.split(',').nth(6), Some(""));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let d = gen_example1(10, 4).unwrap();
        let cl1 = Cl1Trainer::default();
        assert!(robustness_sweep(&[("a".into(), d.clone())], &[], &[0.0], &spec()).is_err());
        assert!(robustness_sweep(&[("a".into(), d)], &[&cl1], &[], &spec()).is_err());
    }
}
