//! JSON records, boundary CSV files and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anscombe_core::explicit::ThresholdResult;
use anscombe_core::{AsymmetricSpec, Boundary, HorizonModel, LowerBoundary, PolicyValueEstimate, Prior, StandardBoundary};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorDto {
    Normal { m0: f64, r0: f64 },
    TwoPoint { delta0: f64 },
    Mixture { points: Vec<f64>, weights: Vec<f64> },
}

impl PriorDto {
    pub fn to_prior(&self) -> AppResult<Prior> {
        Ok(match self {
            PriorDto::Normal { m0, r0 } => Prior::normal(*m0, *r0)?,
            PriorDto::TwoPoint { delta0 } => Prior::two_point(*delta0)?,
            PriorDto::Mixture { points, weights } => Prior::mixture(points.clone(), weights.clone())?,
        })
    }
}

impl From<&Prior> for PriorDto {
    fn from(p: &Prior) -> Self {
        match p {
            Prior::NormalConjugate { m0, r0 } => PriorDto::Normal { m0: *m0, r0: *r0 },
            Prior::SymmetricTwoPoint { delta0 } => PriorDto::TwoPoint { delta0: *delta0 },
            Prior::DiscreteMixture { points, weights } => {
                PriorDto::Mixture { points: points.clone(), weights: weights.clone() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "horizon", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonDto {
    Fixed { n: f64 },
    Exponential { lambda: f64 },
    Lomax { lambda: f64, omega: f64 },
    Table { r: Vec<f64>, f: Vec<f64> },
}

impl HorizonDto {
    pub fn to_model(&self) -> AppResult<HorizonModel> {
        let m = match self.clone() {
            HorizonDto::Fixed { n } => HorizonModel::Fixed { n },
            HorizonDto::Exponential { lambda } => HorizonModel::Exponential { lambda },
            HorizonDto::Lomax { lambda, omega } => HorizonModel::Lomax { lambda, omega },
            HorizonDto::Table { r, f } => HorizonModel::Table { r, f },
        };
        m.validate()?;
        Ok(m)
    }
}

/// `q` as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QDto {
    Finite(f64),
    Named(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl From<AsymmetricSpec> for QDto {
    fn from(s: AsymmetricSpec) -> Self {
        match s {
            AsymmetricSpec::Finite(q) => QDto::Finite(q),
            AsymmetricSpec::Infinite => QDto::Named(InfTag::Inf),
        }
    }
}

/// Parses `inf` or a nonnegative number.
pub fn parse_q(s: &str) -> Result<AsymmetricSpec, String> {
    let spec = match s.trim() {
        "inf" | "infinity" | "Inf" => AsymmetricSpec::Infinite,
        t => AsymmetricSpec::Finite(t.parse::<f64>().map_err(|e| format!("q = {t:?}: {e}"))?),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdDto {
    pub threshold: f64,
    pub residual: f64,
    pub expected_stop_time: Option<f64>,
}

impl From<ThresholdResult> for ThresholdDto {
    fn from(t: ThresholdResult) -> Self {
        Self { threshold: t.threshold, residual: t.residual, expected_stop_time: t.expected_stop_time }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateDto {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub step: f64,
}

impl From<PolicyValueEstimate> for EstimateDto {
    fn from(e: PolicyValueEstimate) -> Self {
        Self { mean: e.mean, std_error: e.std_error, n_paths: e.n_paths, seed: e.seed, step: e.step }
    }
}

pub fn read_text(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| AppError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| AppError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

/// `path` with `.json` appended, for metadata next to a CSV.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// 17 significant digits; `-inf` for an absent lower boundary.
pub fn fmt_num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Time coordinate of a boundary file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeAxis {
    /// `r,b_upper,b_lower`
    R,
    /// `s,c_upper,c_lower`
    S,
}

impl TimeAxis {
    pub fn header(self) -> &'static str {
        match self {
            TimeAxis::R => "r,b_upper,b_lower",
            TimeAxis::S => "s,c_upper,c_lower",
        }
    }
}

/// The lower column is empty for a mirrored boundary and `-inf` when unbounded.
pub fn boundary_csv(axis: TimeAxis, grid: &[f64], upper: &[f64], lower: &LowerBoundary) -> String {
    let mut out = String::with_capacity(64 * grid.len());
    out.push_str(axis.header());
    out.push('\n');
    for i in 0..grid.len() {
        let lo = match lower {
            LowerBoundary::Mirror => String::new(),
            LowerBoundary::Unbounded => fmt_num(f64::NEG_INFINITY),
            LowerBoundary::Curve(l) => fmt_num(l[i]),
        };
        let _ = writeln!(out, "{},{},{}", fmt_num(grid[i]), fmt_num(upper[i]), lo);
    }
    out
}

pub fn r_boundary_csv(b: &Boundary) -> String {
    boundary_csv(TimeAxis::R, &b.grid, &b.upper, &b.lower)
}

pub fn s_boundary_csv(c: &StandardBoundary) -> String {
    boundary_csv(TimeAxis::S, &c.grid, &c.upper, &c.lower)
}

/// A parsed boundary file.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFile {
    pub axis: TimeAxis,
    pub boundary: Boundary,
}

impl BoundaryFile {
    pub fn into_standard(self) -> AppResult<StandardBoundary> {
        if self.axis != TimeAxis::S {
            return Err(AppError::validation("expected an s,c_upper,c_lower file"));
        }
        let b = self.boundary;
        Ok(StandardBoundary::new(b.grid, b.upper, b.lower)?)
    }
}

pub fn parse_boundary_csv(path: &Path, text: &str) -> AppResult<BoundaryFile> {
    let bad = |message: String| AppError::Parse { path: path.to_path_buf(), message };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let header: Vec<&str> = headers.iter().collect();
    let axis = match header.as_slice() {
        ["r", "b_upper", "b_lower"] => TimeAxis::R,
        ["s", "c_upper", "c_lower"] => TimeAxis::S,
        _ => return Err(bad(format!("unrecognized header {:?}", header.join(",")))),
    };
    let (mut grid, mut upper, mut lower) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |j: usize| -> AppResult<f64> {
            let f = rec.get(j).unwrap_or("").trim();
            f.parse::<f64>().map_err(|e| bad(format!("row {}: column {}: {f:?}: {e}", i + 2, j + 1)))
        };
        grid.push(num(0)?);
        upper.push(num(1)?);
        let l = rec.get(2).unwrap_or("").trim();
        lower.push(if l.is_empty() { None } else { Some(num(2)?) });
    }
    let lower = if lower.iter().all(Option::is_none) {
        LowerBoundary::Mirror
    } else if lower.iter().all(|l| *l == Some(f64::NEG_INFINITY)) {
        LowerBoundary::Unbounded
    } else if lower.iter().all(|l| matches!(l, Some(v) if v.is_finite())) {
        LowerBoundary::Curve(lower.into_iter().flatten().collect())
    } else {
        return Err(bad("lower column must be all empty, all -inf or all finite".into()));
    };
    let boundary = Boundary::new(grid, upper, lower).map_err(|e| bad(e.to_string()))?;
    Ok(BoundaryFile { axis, boundary })
}

pub fn read_boundary_csv(path: &Path) -> AppResult<BoundaryFile> {
    parse_boundary_csv(path, &read_text(path)?)
}
