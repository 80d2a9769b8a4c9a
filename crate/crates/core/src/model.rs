//! Trained classifier: a pair of quadratic surfaces and the nearest-surface rule.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::NormalizationParams;
use crate::error::{Error, Result};
use crate::quadvec::{self, LiftingMode, STRUCTURE_TOL};

/// Guard on `‖Wx + b‖` in the distance denominator.
pub const GRADIENT_GUARD: f64 = 1e-12;

pub const MODEL_FORMAT: &str = "qtsvm-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

/// `½xᵀWx + bᵀx + c = 0` with symmetric `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSurface {
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticSurface {
    pub fn new(w: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if w.shape() != (n, n) {
            return Err(Error::invalid(format!(
                "W is {}x{} but b has length {n}",
                w.nrows(),
                w.ncols()
            )));
        }
        if !(w.iter().all(|v| v.is_finite()) && b.iter().all(|v| v.is_finite()) && c.is_finite()) {
            return Err(Error::invalid("surface has non-finite coefficients"));
        }
        for i in 0..n {
            for j in i + 1..n {
                if !((w[(i, j)] - w[(j, i)]).abs() <= STRUCTURE_TOL) {
                    return Err(Error::invalid("W is not symmetric"));
                }
            }
        }
        Ok(Self { w, b, c })
    }

    pub(crate) fn from_parts(w: DMatrix<f64>, b: DVector<f64>, c: f64) -> Self {
        Self { w, b, c }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            w: &self.w * lambda,
            b: &self.b * lambda,
            c: self.c * lambda,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `½xᵀWx + bᵀx + c`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let xv = DVector::from_column_slice(x);
        Ok(0.5 * xv.dot(&(&self.w * &xv)) + self.b.dot(&xv) + self.c)
    }

    /// `|½xᵀWx + bᵀx + c| / max(‖Wx + b‖, δ)`.
    pub fn normalized_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let xv = DVector::from_column_slice(x);
        let wx = &self.w * &xv;
        let value = 0.5 * xv.dot(&wx) + self.b.dot(&xv) + self.c;
        let grad = (wx + &self.b).norm();
        Ok(value.abs() / grad.max(GRADIENT_GUARD))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub surface_pos: QuadraticSurface,
    pub surface_neg: QuadraticSurface,
    pub mode: LiftingMode,
    pub scaler: NormalizationParams,
}

impl TrainedModel {
    pub fn new(
        surface_pos: QuadraticSurface,
        surface_neg: QuadraticSurface,
        mode: LiftingMode,
        scaler: NormalizationParams,
    ) -> Result<Self> {
        let n = surface_pos.dim();
        if surface_neg.dim() != n {
            return Err(Error::InconsistentModel(format!(
                "positive surface has n = {n}, negative surface has n = {}",
                surface_neg.dim()
            )));
        }
        if scaler.dim() != n {
            return Err(Error::InconsistentModel(format!(
                "surfaces have n = {n}, scaler has n = {}",
                scaler.dim()
            )));
        }
        if mode == LiftingMode::Reduced {
            for s in [&surface_pos, &surface_neg] {
                quadvec::dvec(&s.w)
                    .map_err(|_| Error::InconsistentModel("reduced-mode surface has off-diagonal W".into()))?;
            }
        }
        Ok(Self {
            surface_pos,
            surface_neg,
            mode,
            scaler,
        })
    }

    pub fn dim(&self) -> usize {
        self.surface_pos.dim()
    }

    /// Normalized distances `(to positive surface, to negative surface)` for a raw sample.
    pub fn distances(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let scaled = self.scaler.apply_row(x);
        Ok((
            self.surface_pos.normalized_distance(&scaled)?,
            self.surface_neg.normalized_distance(&scaled)?,
        ))
    }

    /// Nearest surface wins; ties go to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let (dp, dn) = self.distances(x)?;
        Ok(if dp <= dn { Label::Positive } else { Label::Negative })
    }

    /// Predicts every row of an `m × n` matrix of raw samples.
    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        let mut row = vec![0.0; x.ncols()];
        (0..x.nrows())
            .map(|r| {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = x[(r, k)];
                }
                self.predict(&row)
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = std::fs::File::create(path).map_err(io_err)?;
        file.write_all(self.to_document()?.as_bytes()).map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_document(&text)
    }

    /// Serializes to the model-file text format.
    pub fn to_document(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            mode: self.mode,
            n: self.dim(),
            scaler: ScalerRecord {
                min: self.scaler.min.clone(),
                max: self.scaler.max.clone(),
            },
            positive: SurfaceRecord::from_surface(&self.surface_pos, self.mode)?,
            negative: SurfaceRecord::from_surface(&self.surface_neg, self.mode)?,
        };
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
        file.serialize(&mut ser)
            .map_err(|e| Error::invalid(format!("cannot serialize model: {e}")))?;
        out.push(b'\n');
        Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            _ => {
                return Err(Error::MalformedModel(format!(
                    "missing or wrong \"format\" tag (expected {MODEL_FORMAT:?})"
                )))
            }
        }
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::MalformedModel("missing \"version\"".into()))?;
        if version != MODEL_VERSION as u64 {
            return Err(Error::VersionMismatch {
                found: version.min(u32::MAX as u64) as u32,
                supported: MODEL_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::MalformedModel(e.to_string()))?;

        let n = file.n;
        if n == 0 {
            return Err(Error::InconsistentModel("n must be at least 1".into()));
        }
        if file.scaler.min.len() != n || file.scaler.max.len() != n {
            return Err(Error::InconsistentModel(format!(
                "n = {n} but scaler has {} min / {} max entries",
                file.scaler.min.len(),
                file.scaler.max.len()
            )));
        }
        let scaler = NormalizationParams::new(file.scaler.min, file.scaler.max)
            .map_err(|e| Error::InconsistentModel(e.to_string()))?;
        let pos = file.positive.into_surface(n, file.mode, "positive")?;
        let neg = file.negative.into_surface(n, file.mode, "negative")?;
        Self::new(pos, neg, file.mode, scaler)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    mode: LiftingMode,
    n: usize,
    scaler: ScalerRecord,
    positive: SurfaceRecord,
    negative: SurfaceRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalerRecord {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceRecord {
    /// `hvec(W)` in full mode, `dvec(W)` in reduced mode.
    w: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

impl SurfaceRecord {
    fn from_surface(s: &QuadraticSurface, mode: LiftingMode) -> Result<Self> {
        let quad = match mode {
            LiftingMode::Full => quadvec::hvec(&s.w)?,
            LiftingMode::Reduced => quadvec::dvec(&s.w)?,
        };
        if !s.c.is_finite() || quad.iter().chain(s.b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("cannot save a surface with non-finite coefficients"));
        }
        Ok(Self {
            w: quad.iter().copied().collect(),
            b: s.b.iter().copied().collect(),
            c: s.c,
        })
    }

    fn into_surface(self, n: usize, mode: LiftingMode, which: &str) -> Result<QuadraticSurface> {
        let q = mode.quadratic_len(n);
        if self.w.len() != q || self.b.len() != n {
            return Err(Error::InconsistentModel(format!(
                "{which} surface has {} W entries and {} b entries; n = {n} in {mode} mode needs {q} and {n}",
                self.w.len(),
                self.b.len()
            )));
        }
        let packed = DVector::from_iterator(
            mode.lifted_len(n),
            self.w.into_iter().chain(self.b).chain(std::iter::once(self.c)),
        );
        quadvec::unpack_weights(&packed, n, mode)
    }
}

/// Pretty JSON with every float written as 17 significant digits.
#[derive(Default)]
struct FullPrecision<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(writer)
    }
}
