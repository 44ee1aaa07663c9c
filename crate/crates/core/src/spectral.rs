//! Finite Hodge-decomposition models: on each joint eigenspace `dδ` and `δd`
//! act by scalars, so an element of `R` acts by a rational number.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{int, rational_str, Rational};
use crate::error::{Error, Result};
use crate::form::OperatorPoly;

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    /// In the range of `d`; `dδ` acts by the eigenvalue, `δd` by 0.
    Exact,
    /// In the range of `δ`; `δd` acts by the eigenvalue, `dδ` by 0.
    Coexact,
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub kind: PointKind,
    #[serde(with = "rational_str")]
    pub eigenvalue: Rational,
    pub multiplicity: u64,
}

impl SpectralPoint {
    pub fn new(kind: PointKind, eigenvalue: Rational, multiplicity: u64) -> Self {
        Self { kind, eigenvalue, multiplicity }
    }

    pub fn harmonic(multiplicity: u64) -> Self {
        Self::new(PointKind::Harmonic, Rational::zero(), multiplicity)
    }

    /// Values of `(E, F)` on this eigenspace.
    pub fn ef(&self) -> (Rational, Rational) {
        match self.kind {
            PointKind::Exact => (self.eigenvalue.clone(), Rational::zero()),
            PointKind::Coexact => (Rational::zero(), self.eigenvalue.clone()),
            PointKind::Harmonic => (Rational::zero(), Rational::zero()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    Synthetic,
    SpherePreset,
    TorusPreset,
    DecImport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub version: u32,
    pub n: u32,
    pub k: u32,
    #[serde(with = "rational_str")]
    pub j_value: Rational,
    pub points: Vec<SpectralPoint>,
    pub source: ModelSource,
    #[serde(default)]
    pub trusted: bool,
}

impl SpectralModel {
    pub fn new(n: u32, k: u32, j_value: Rational, points: Vec<SpectralPoint>, source: ModelSource) -> Result<Self> {
        let m = Self { version: MODEL_VERSION, n, k, j_value, points, source, trusted: source == ModelSource::Synthetic };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Parse(format!("unsupported spectral model version {}", self.version)));
        }
        for p in &self.points {
            if p.kind == PointKind::Harmonic && !p.eigenvalue.is_zero() {
                return Err(Error::InvalidParameters("harmonic point with nonzero eigenvalue".into()));
            }
            let riemannian = matches!(self.source, ModelSource::SpherePreset | ModelSource::TorusPreset | ModelSource::DecImport);
            if riemannian && p.eigenvalue.is_negative() {
                return Err(Error::InvalidParameters(format!("negative eigenvalue {} in a Riemannian model", p.eigenvalue)));
            }
        }
        if self.source == ModelSource::TorusPreset && !self.j_value.is_zero() {
            return Err(Error::InvalidParameters("torus models are flat (J = 0)".into()));
        }
        Ok(())
    }

    pub fn total_dimension(&self) -> u64 {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SpectralModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Scalar by which `op` acts on the eigenspace `pt`, with `J = j_value`.
pub fn eval_scalar(op: &OperatorPoly, pt: &SpectralPoint, j_value: &Rational) -> Result<Rational> {
    let (e, f) = pt.ef();
    op.eval_scalar(&e, &f, j_value)
}

/// Sum of multiplicities of the points annihilated by `op`.
pub fn kernel_dim(op: &OperatorPoly, model: &SpectralModel) -> Result<u64> {
    let mut dim = 0;
    for p in &model.points {
        if eval_scalar(op, p, &model.j_value)?.is_zero() {
            dim += p.multiplicity;
        }
    }
    Ok(dim)
}

/// Spectrum of the flat torus `R^n / (2πZ)^n` on `k`-forms, all modes with
/// `|ξ|² ≤ max_norm`.
pub fn torus_preset(n: u32, k: u32, max_norm: u64) -> Result<SpectralModel> {
    if k > n {
        return Err(Error::InvalidParameters(format!("k = {k} exceeds n = {n}")));
    }
    let r = (max_norm as f64).sqrt().floor() as i64;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut xi = vec![-r; n as usize];
    loop {
        let norm: i64 = xi.iter().map(|x| x * x).sum();
        if norm > 0 && norm as u64 <= max_norm {
            *counts.entry(norm as u64).or_default() += 1;
        }
        let mut i = 0;
        while i < xi.len() {
            xi[i] += 1;
            if xi[i] <= r {
                break;
            }
            xi[i] = -r;
            i += 1;
        }
        if i == xi.len() {
            break;
        }
    }
    let exact_dim = if k == 0 { 0 } else { binomial(n as u64 - 1, k as u64 - 1) };
    let coexact_dim = if k == n { 0 } else { binomial(n as u64 - 1, k as u64) };
    let mut points = vec![SpectralPoint::harmonic(binomial(n as u64, k as u64))];
    for (norm, c) in counts {
        if exact_dim > 0 {
            points.push(SpectralPoint::new(PointKind::Exact, int(norm as i64), c * exact_dim));
        }
        if coexact_dim > 0 {
            points.push(SpectralPoint::new(PointKind::Coexact, int(norm as i64), c * coexact_dim));
        }
    }
    let mut m = SpectralModel::new(n, k, Rational::zero(), points, ModelSource::TorusPreset)?;
    m.trusted = true;
    Ok(m)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// One tabulated eigenspace of the unit sphere with where the value came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereEntry {
    pub k: u32,
    pub kind: PointKind,
    /// Harmonic-polynomial degree indexing the eigenspace.
    pub l: u32,
    #[serde(with = "rational_str")]
    pub eigenvalue: Rational,
    pub multiplicity: u64,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereValidation {
    pub method: String,
    pub relative_tolerance: f64,
    /// `(k, kind, l, measured value)` for every entry that was checked.
    pub checked: Vec<(u32, PointKind, u32, f64)>,
}

/// Versioned table of unit-sphere form spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereData {
    pub version: u32,
    pub n: u32,
    #[serde(with = "rational_str")]
    pub j_value: Rational,
    pub trusted: bool,
    #[serde(default)]
    pub validation: Option<SphereValidation>,
    pub harmonic: BTreeMap<u32, u64>,
    pub entries: Vec<SphereEntry>,
}

impl SphereData {
    pub fn from_json(s: &str) -> Result<Self> {
        let d: SphereData = serde_json::from_str(s)?;
        if d.version != MODEL_VERSION {
            return Err(Error::Parse(format!("unsupported sphere data version {}", d.version)));
        }
        Ok(d)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Entries of degree `k` and given kind, sorted by `l`.
    pub fn entries_of(&self, k: u32, kind: PointKind) -> Vec<&SphereEntry> {
        let mut v: Vec<_> = self.entries.iter().filter(|e| e.k == k && e.kind == kind).collect();
        v.sort_by_key(|e| e.l);
        v
    }

    /// The model for `k`-forms with all entries of index `l ≤ l_max`.
    /// Fails unless the table has been validated.
    pub fn model(&self, k: u32, l_max: u32) -> Result<SpectralModel> {
        if !self.trusted {
            return Err(Error::Untrusted(format!("unit S^{} table has not been validated", self.n)));
        }
        let mut points = Vec::new();
        if let Some(&h) = self.harmonic.get(&k) {
            if h > 0 {
                points.push(SpectralPoint::harmonic(h));
            }
        }
        for e in self.entries.iter().filter(|e| e.k == k && e.l <= l_max && e.l >= 1) {
            points.push(SpectralPoint::new(e.kind, e.eigenvalue.clone(), e.multiplicity));
        }
        let mut m = SpectralModel::new(self.n, k, self.j_value.clone(), points, ModelSource::SpherePreset)?;
        m.trusted = true;
        Ok(m)
    }
}

/// Directory holding the bundled data tables.
pub fn data_dir() -> PathBuf {
    match std::env::var_os("TRACTORFORMS_DATA") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")),
    }
}

pub fn sphere_data_path(n: u32) -> PathBuf {
    data_dir().join(format!("sphere_s{n}.json"))
}

/// Unit-sphere model from the table at `path`.
pub fn sphere_preset_from(path: &Path, n: u32, k: u32, l_max: u32) -> Result<SpectralModel> {
    if !path.exists() {
        return Err(Error::Untrusted(format!("no sphere data at {}", path.display())));
    }
    let d = SphereData::read(path)?;
    if d.n != n {
        return Err(Error::InvalidParameters(format!("table is for S^{}, not S^{n}", d.n)));
    }
    d.model(k, l_max)
}

/// Unit-sphere model from the table in [`data_dir`].
pub fn sphere_preset(n: u32, k: u32, l_max: u32) -> Result<SpectralModel> {
    sphere_preset_from(&sphere_data_path(n), n, k, l_max)
}
