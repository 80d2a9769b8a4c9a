//! Labeled datasets, synthetic generators, label noise, CSV I/O and min-max scaling.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Label;
use crate::rng;

/// Binary dataset. Rows of `features` are samples; `labels[i]` is the class of row `i`.
///
/// The positive and negative sample matrices are views built on demand by
/// [`Dataset::x_pos`] and [`Dataset::x_neg`]. Keeping one row order makes label
/// flips and fold assignment index-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<Label>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<Label>, provenance: impl Into<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::invalid("dataset has zero features"));
        }
        if let Some(k) = features.iter().position(|v| !v.is_finite()) {
            let (r, c) = (k % features.nrows(), k / features.nrows());
            return Err(Error::invalid(format!("non-finite feature at row {r}, column {c}")));
        }
        Ok(Self {
            features,
            labels,
            provenance: provenance.into(),
        })
    }

    /// Builds a dataset from separate class matrices (positives first).
    pub fn from_classes(x_pos: &DMatrix<f64>, x_neg: &DMatrix<f64>, provenance: impl Into<String>) -> Result<Self> {
        if x_pos.ncols() != x_neg.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x_pos.ncols(),
                got: x_neg.ncols(),
            });
        }
        let n = x_pos.ncols();
        let (mp, mn) = (x_pos.nrows(), x_neg.nrows());
        let features = DMatrix::from_fn(
            mp + mn,
            n,
            |r, c| {
                if r < mp {
                    x_pos[(r, c)]
                } else {
                    x_neg[(r - mp, c)]
                }
            },
        );
        let labels = (0..mp + mn)
            .map(|r| if r < mp { Label::Positive } else { Label::Negative })
            .collect();
        Self::new(features, labels, provenance)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    fn rows(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), self.dim(), |r, c| self.features[(idx[r], c)])
    }

    /// `m₊ × n` matrix of positive samples, in dataset order.
    pub fn x_pos(&self) -> DMatrix<f64> {
        self.rows(&self.indices_of(Label::Positive))
    }

    /// `m₋ × n` matrix of negative samples, in dataset order.
    pub fn x_neg(&self) -> DMatrix<f64> {
        self.rows(&self.indices_of(Label::Negative))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Flips the class of every listed row.
    pub fn flip_labels(&self, idx: &[usize]) -> Result<Dataset> {
        let mut out = self.clone();
        for &i in idx {
            let l = out
                .labels
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("flip index {i} out of range")))?;
            *l = match *l {
                Label::Positive => Label::Negative,
                Label::Negative => Label::Positive,
            };
        }
        Ok(out)
    }

    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.provenance.clone())
    }
}

/// Per-feature min and max used for the `[-1, 1]` scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::invalid("scaler min and max have different lengths"));
        }
        if min.is_empty() {
            return Err(Error::invalid("scaler has zero features"));
        }
        for (k, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!(
                    "scaler feature {k}: need finite min <= max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn fit(d: &Dataset) -> Result<Self> {
        Self::fit_matrix(d.features())
    }

    pub fn fit_matrix(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::invalid("cannot fit a scaler on zero samples"));
        }
        let min = x.column_iter().map(|c| c.min()).collect();
        let max = x.column_iter().map(|c| c.max()).collect();
        Self::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    fn scale(&self, k: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[k], self.max[k]);
        if hi == lo {
            0.0
        } else {
            2.0 * (v - lo) / (hi - lo) - 1.0
        }
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(k, &v)| self.scale(k, v)).collect()
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| self.scale(c, x[(r, c)])))
    }

    pub fn apply_dataset(&self, d: &Dataset) -> Result<Dataset> {
        d.with_features(self.apply(d.features())?)
    }
}

/// How the second parameter of `N(0, s)` in the generators is read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    Variance(f64),
    StdDev(f64),
}

impl NoiseScale {
    pub fn std_dev(self) -> f64 {
        match self {
            NoiseScale::Variance(v) => v.sqrt(),
            NoiseScale::StdDev(s) => s,
        }
    }
}

/// Which synthetic benchmark to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    /// Two facing parabolas, `x2 = ±0.2222·x1² + {0.5, 1.5}`.
    One,
    /// Points on a radius-3 circle.
    Two,
    /// Two mirrored parabolas on overlapping x1 ranges.
    Three,
}

impl Example {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(Example::One),
            2 => Ok(Example::Two),
            3 => Ok(Example::Three),
            _ => Err(Error::invalid(format!("unknown example {i} (expected 1, 2 or 3)"))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Example::One => 1,
            Example::Two => 2,
            Example::Three => 3,
        }
    }

    pub fn default_noise(self) -> NoiseScale {
        match self {
            Example::Two => NoiseScale::StdDev(0.2),
            _ => NoiseScale::StdDev(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorOptions {
    pub noise: NoiseScale,
    /// Angle range of the positive class in Example 2.
    pub example2_pos_theta: (f64, f64),
}

impl GeneratorOptions {
    pub fn for_example(example: Example) -> Self {
        Self {
            noise: example.default_noise(),
            example2_pos_theta: (0.0, 2.0 * PI),
        }
    }
}

/// Noiseless curve value of each class, given the abscissa (or angle for Example 2).
pub fn example_curve(example: Example, label: Label, t: f64) -> [f64; 2] {
    match (example, label) {
        (Example::One, Label::Positive) => [t, 0.2222 * t * t + 0.5],
        (Example::One, Label::Negative) => [t, -0.2222 * t * t + 1.5],
        (Example::Two, _) => [3.0 * t.cos(), 3.0 * t.sin()],
        (Example::Three, Label::Positive) => [t, 0.75 * t * t + 1.5 * t + 0.75],
        (Example::Three, Label::Negative) => [t, 0.75 * t * t - 1.5 * t + 0.75],
    }
}

fn parameter_range(example: Example, label: Label, opts: &GeneratorOptions) -> (f64, f64) {
    match (example, label) {
        (Example::One, _) => (-3.0, 3.0),
        (Example::Two, Label::Positive) => opts.example2_pos_theta,
        (Example::Two, Label::Negative) => (PI, 2.0 * PI),
        (Example::Three, Label::Positive) => (-3.0, 1.0),
        (Example::Three, Label::Negative) => (-1.0, 3.0),
    }
}

/// Draws `m_per_class` points per class; additive Gaussian noise on `x2`.
pub fn generate(example: Example, m_per_class: usize, seed: u64, opts: &GeneratorOptions) -> Result<Dataset> {
    if m_per_class == 0 {
        return Err(Error::invalid("m_per_class must be at least 1"));
    }
    let sigma = opts.noise.std_dev();
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!("invalid noise scale {:?}", opts.noise)));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = rng::stream(seed, "generate", example.index() as u64);
    let m = 2 * m_per_class;
    let mut features = DMatrix::zeros(m, 2);
    let mut labels = Vec::with_capacity(m);
    for (block, label) in [Label::Positive, Label::Negative].into_iter().enumerate() {
        let (lo, hi) = parameter_range(example, label, opts);
        for i in 0..m_per_class {
            let t = rng.random_range(lo..=hi);
            let [x1, x2] = example_curve(example, label, t);
            let r = block * m_per_class + i;
            features[(r, 0)] = x1;
            features[(r, 1)] = x2 + normal.sample(&mut rng);
            labels.push(label);
        }
    }
    Dataset::new(features, labels, format!("example{}", example.index()))
}

pub fn gen_example1(m_per_class: usize, seed: u64) -> Result<Dataset> {
    generate(
        Example::One,
        m_per_class,
        seed,
        &GeneratorOptions::for_example(Example::One),
    )
}

pub fn gen_example2(m_per_class: usize, seed: u64) -> Result<Dataset> {
    generate(
        Example::Two,
        m_per_class,
        seed,
        &GeneratorOptions::for_example(Example::Two),
    )
}

pub fn gen_example3(m_per_class: usize, seed: u64) -> Result<Dataset> {
    generate(
        Example::Three,
        m_per_class,
        seed,
        &GeneratorOptions::for_example(Example::Three),
    )
}

/// Indices flipped by [`inject_label_noise`]: `⌊ratio·m⌋` distinct rows, uniform over all samples.
pub fn label_noise_indices(m: usize, ratio: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::invalid(format!("noise ratio {ratio} must lie in [0, 1)")));
    }
    let k = (ratio * m as f64).floor() as usize;
    let mut rng = rng::stream(seed, "label_noise", 0);
    let mut idx = rand::seq::index::sample(&mut rng, m, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

pub fn inject_label_noise(d: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    let idx = label_noise_indices(d.len(), ratio, seed)?;
    d.flip_labels(&idx)
}

/// Where the label lives in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    /// The last column.
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "last" {
            LabelColumn::Last
        } else if let Ok(i) = s.parse() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    if !path.exists() {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    reader
        .records()
        .filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)))
        .map(|r| {
            r.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })
        })
        .collect()
}

fn looks_like_header(rec: &csv::StringRecord, skip: Option<usize>) -> bool {
    rec.iter()
        .enumerate()
        .any(|(k, cell)| Some(k) != skip && cell.parse::<f64>().is_err())
}

fn same_label(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn parse_rows(
    path: &Path,
    records: &[csv::StringRecord],
    first_row: usize,
    width: usize,
    skip: Option<usize>,
) -> Result<DMatrix<f64>> {
    let n = width - skip.map_or(0, |_| 1);
    let mut features = DMatrix::zeros(records.len(), n);
    for (r, rec) in records.iter().enumerate() {
        let row = first_row + r;
        if rec.len() != width {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row,
                expected: width,
                found: rec.len(),
            });
        }
        let mut c = 0;
        for (k, cell) in rec.iter().enumerate() {
            if Some(k) == skip {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                path: path.to_path_buf(),
                row,
                column: k + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    path: path.to_path_buf(),
                    row,
                    column: k + 1,
                    value: cell.to_string(),
                });
            }
            features[(r, c)] = v;
            c += 1;
        }
    }
    Ok(features)
}

/// Loads a labeled CSV. Row and column numbers in errors are 1-based file positions.
///
/// The first row is treated as a header when any of its feature cells is not
/// a number, or always when the label column is given by name.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, positive_label: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let records = read_records(path)?;
    let Some(first) = records.first() else {
        return Err(Error::invalid(format!("{}: file is empty", path.display())));
    };
    let width = first.len();
    let (label_idx, has_header) = match label_column {
        LabelColumn::Name(name) => match first.iter().position(|h| h == name) {
            Some(i) => (i, true),
            None => {
                return Err(Error::MissingLabelColumn {
                    path: path.to_path_buf(),
                    column: name.clone(),
                })
            }
        },
        LabelColumn::Index(i) => (*i, looks_like_header(first, Some(*i))),
        LabelColumn::Last => (width.saturating_sub(1), looks_like_header(first, width.checked_sub(1))),
    };
    if label_idx >= width || width < 2 {
        return Err(Error::MissingLabelColumn {
            path: path.to_path_buf(),
            column: format!("{label_column:?}"),
        });
    }
    let body = if has_header { &records[1..] } else { &records[..] };
    let first_row = if has_header { 2 } else { 1 };
    let features = parse_rows(path, body, first_row, width, Some(label_idx))?;

    let mut negative_label: Option<String> = None;
    let mut labels = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        let value = &rec[label_idx];
        if same_label(value, positive_label) {
            labels.push(Label::Positive);
            continue;
        }
        match &negative_label {
            Some(neg) if same_label(value, neg) => {}
            Some(neg) => {
                return Err(Error::UnknownLabel {
                    path: path.to_path_buf(),
                    row: first_row + r,
                    value: value.to_string(),
                    known: vec![positive_label.to_string(), neg.clone()],
                })
            }
            None => negative_label = Some(value.to_string()),
        }
        labels.push(Label::Negative);
    }
    Dataset::new(features, labels, path.display().to_string())
}

/// Loads an unlabeled CSV of features (header auto-detected).
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let records = read_records(path)?;
    let Some(first) = records.first() else {
        return Err(Error::invalid(format!("{}: file is empty", path.display())));
    };
    let has_header = looks_like_header(first, None);
    let body = if has_header { &records[1..] } else { &records[..] };
    parse_rows(path, body, if has_header { 2 } else { 1 }, first.len(), None)
}

/// Writes `x1,...,xn,label` with labels `1` / `-1`.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: PathBuf::from(path),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = (1..=d.dim()).map(|k| format!("x{k}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..d.len() {
        let mut rec: Vec<String> = d.row(i).iter().map(|v| format!("{v:?}")).collect();
        rec.push(d.labels()[i].as_i8().to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
