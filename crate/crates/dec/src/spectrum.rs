//! Exact, coexact and harmonic spectra of the discrete Hodge Laplacian, and
//! validation against the unit-sphere data table.

use serde::{Deserialize, Serialize};
use tractorforms::spectral::{ModelSource, SphereData, SphereValidation};
use tractorforms::{Rational, SpectralModel, SpectralPoint};

pub use tractorforms::spectral::PointKind;

use crate::eigen::{dense_lowest, krylov_lowest, pcg, EigenConfig};
use crate::hodge::Dec;
use crate::{DecError, Result};

/// Lowest eigenvalues of `dδ` (exact) and `δd` (coexact) on `k`-forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k: usize,
    pub harmonic: usize,
    pub exact: Vec<f64>,
    pub coexact: Vec<f64>,
    pub methods: Vec<String>,
}

impl Spectrum {
    /// All values with their kinds, sorted by value.
    pub fn listing(&self) -> Vec<(f64, PointKind)> {
        let mut v: Vec<(f64, PointKind)> = std::iter::repeat_n((0.0, PointKind::Harmonic), self.harmonic)
            .chain(self.exact.iter().map(|&x| (x, PointKind::Exact)))
            .chain(self.coexact.iter().map(|&x| (x, PointKind::Coexact)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    pub fn values(&self, kind: PointKind) -> &[f64] {
        match kind {
            PointKind::Exact => &self.exact,
            PointKind::Coexact => &self.coexact,
            PointKind::Harmonic => &[],
        }
    }
}

/// Groups sorted values into clusters `(mean, multiplicity)`.
pub fn clusters(values: &[f64], rel_gap: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for &v in values {
        if let Some(&last) = group.last() {
            if (v - last).abs() > rel_gap * v.abs().max(1.0) {
                out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
                group.clear();
            }
        }
        group.push(v);
    }
    if !group.is_empty() {
        out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
    }
    out
}

/// Nonzero spectrum of `δd` on `k`-forms, lowest `count` values.
///
/// Small problems are solved densely and the kernel (exact plus harmonic
/// forms, of known dimension) is dropped. Large ones iterate inside the
/// orthogonal complement of the exact forms, so only the harmonic zeros
/// remain to be dropped.
///
/// Vanishing weights can enlarge the kernel; then the degree is redone with
/// the inner-product star as weight.
fn coexact_values(dec: &Dec, k: usize, count: usize, cfg: &EigenConfig, methods: &mut Vec<String>) -> Result<Vec<f64>> {
    if k == 3 || count == 0 {
        return Ok(Vec::new());
    }
    match coexact_values_with(dec, k, count, cfg, methods) {
        Err(DecError::Degenerate(msg)) if dec.stars.weight_kind[k + 1] != dec.stars.inner_kind[k + 1] => {
            let mut fixed = dec.clone();
            fixed.stars = dec.stars.without_vanishing_weight(k + 1);
            methods.push(format!("k={k}: {msg}; retrying with the inner-product star in degree {}", k + 1));
            coexact_values_with(&fixed, k, count, cfg, methods)
        }
        other => other,
    }
}

fn coexact_values_with(dec: &Dec, k: usize, count: usize, cfg: &EigenConfig, methods: &mut Vec<String>) -> Result<Vec<f64>> {
    let n = dec.dim(k);
    let exact_dim = if k == 0 { 0 } else { dec.ranks[k - 1] };
    let b = dec.betti[k];
    let up = dec.laplacian(k, 1.0, 0.0)?;
    let (pairs, kernel) = if n <= cfg.dense_limit {
        let kernel = exact_dim + b;
        (dense_lowest(&up, (kernel + count).min(n)), kernel)
    } else if k == 0 {
        (krylov_lowest(&up, (b + count).min(n), cfg, None)?, b)
    } else {
        // Exact forms are the range of Bᵀ, B the up factor one degree down.
        // The projection solves with the full Laplacian there plus a tiny
        // shift; its harmonic error is annihilated by B.
        let factor = dec.laplacian(k - 1, 1.0, 0.0)?;
        let (_, bf, bt) = factor.term(0);
        let lower = dec.laplacian(k - 1, 1.0, 1.0)?;
        let diag = lower.diagonal();
        let eps = 1e-10 * diag.iter().sum::<f64>() / diag.len() as f64;
        let tight = EigenConfig { cg_tol: 1e-12, ..cfg.clone() };
        let failures = std::sync::atomic::AtomicUsize::new(0);
        let project = |v: &mut [f64]| match pcg(&lower, eps, &diag, &bt.apply(v), &tight) {
            Ok(phi) => {
                let e = bf.apply(&phi);
                v.iter_mut().zip(&e).for_each(|(x, y)| *x -= y);
            }
            Err(_) => {
                failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
        };
        let pairs = krylov_lowest(&up, (b + count).min(n - exact_dim), cfg, Some(&project))?;
        let failed = failures.into_inner();
        if failed > 0 {
            return Err(DecError::NoConvergence(format!("{failed} projections onto coexact forms did not converge")));
        }
        (pairs, b)
    };
    let top = pairs.values.last().copied().unwrap_or(0.0);
    let zero_tol = 1e-8 * top.max(1.0);
    let zeros = pairs.values.iter().filter(|v| v.abs() <= zero_tol).count();
    if zeros != kernel {
        return Err(DecError::Degenerate(format!(
            "{k}-forms: {zeros} numerically zero eigenvalues, expected {kernel}"
        )));
    }
    methods.push(format!("k={k} coexact: {} ({} rounds)", pairs.method, pairs.iterations));
    Ok(pairs.values[kernel..].to_vec())
}

/// Harmonic dimension (from exact ranks) plus the lowest `count` exact and
/// coexact eigenvalues on `k`-forms. Exact eigenvalues on `k`-forms are the
/// coexact ones on `(k-1)`-forms.
pub fn spectrum(dec: &Dec, k: usize, count: usize, cfg: &EigenConfig) -> Result<Spectrum> {
    if k > 3 {
        return Err(DecError::InvalidParameters(format!("degree {k} exceeds 3")));
    }
    if count > dec.dim(k) {
        return Err(DecError::InvalidParameters(format!("{count} eigenvalues requested on a space of dimension {}", dec.dim(k))));
    }
    let mut methods = Vec::new();
    let exact = if k == 0 { Vec::new() } else { coexact_values(dec, k - 1, count, cfg, &mut methods)? };
    let coexact = coexact_values(dec, k, count, cfg, &mut methods)?;
    Ok(Spectrum { k, harmonic: dec.betti[k], exact, coexact, methods })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub k: u32,
    pub kind: PointKind,
    pub l: u32,
    pub expected: f64,
    pub multiplicity: u64,
    pub measured: Vec<f64>,
    pub max_relative_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereCheck {
    pub mesh: String,
    pub relative_tolerance: f64,
    pub levels: Vec<LevelCheck>,
    pub passed: bool,
}

impl SphereCheck {
    pub fn max_error(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, l| m.max(l.max_relative_error))
    }
}

fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Compares the lowest `levels` eigenspaces of each kind with `data`. Each
/// tabulated eigenspace of multiplicity `m` consumes the next `m` measured
/// values, so splitting on the mesh is tolerated but counted in the error.
pub fn check_sphere(mesh: &str, spec: &Spectrum, data: &SphereData, levels: u32, tol: f64) -> Result<SphereCheck> {
    let k = spec.k as u32;
    let mut out = Vec::new();
    for kind in [PointKind::Exact, PointKind::Coexact] {
        let measured = spec.values(kind);
        let mut pos = 0usize;
        for e in data.entries_of(k, kind).into_iter().filter(|e| e.l >= 1).take(levels as usize) {
            let m = e.multiplicity as usize;
            if pos + m > measured.len() {
                return Err(DecError::InvalidParameters(format!(
                    "need at least {} {kind:?} eigenvalues to check level l={}, have {}",
                    pos + m,
                    e.l,
                    measured.len()
                )));
            }
            let expected = to_f64(&e.eigenvalue);
            let vals = measured[pos..pos + m].to_vec();
            pos += m;
            let err = vals.iter().fold(0.0f64, |a, v| a.max((v - expected).abs() / expected));
            out.push(LevelCheck {
                k,
                kind,
                l: e.l,
                expected,
                multiplicity: e.multiplicity,
                measured: vals,
                max_relative_error: err,
                passed: err <= tol,
            });
        }
    }
    let passed = !out.is_empty() && out.iter().all(|l| l.passed);
    Ok(SphereCheck { mesh: mesh.to_string(), relative_tolerance: tol, levels: out, passed })
}

/// The checked eigenspaces as an exact model with the tabulated values.
/// Trusted only when every level passed.
pub fn to_model(spec: &Spectrum, data: &SphereData, check: &SphereCheck) -> Result<SpectralModel> {
    let mut points = Vec::new();
    if spec.harmonic > 0 {
        points.push(SpectralPoint::harmonic(spec.harmonic as u64));
    }
    for lv in &check.levels {
        let e = data
            .entries_of(lv.k, lv.kind)
            .into_iter()
            .find(|e| e.l == lv.l)
            .ok_or_else(|| DecError::InvalidParameters(format!("no table entry for l={}", lv.l)))?;
        points.push(SpectralPoint::new(lv.kind, e.eigenvalue.clone(), lv.measured.len() as u64));
    }
    let mut model = SpectralModel::new(data.n, spec.k as u32, data.j_value.clone(), points, ModelSource::DecImport)?;
    model.trusted = check.passed;
    Ok(model)
}

/// A trusted copy of `data` carrying the validation record. Refuses unless
/// every check passed.
pub fn promote(data: &SphereData, checks: &[SphereCheck], method: &str) -> Result<SphereData> {
    if checks.is_empty() || !checks.iter().all(|c| c.passed) {
        return Err(DecError::Core(tractorforms::Error::Untrusted(
            "sphere table can only be promoted after every check passes".into(),
        )));
    }
    let tol = checks.iter().fold(0.0f64, |m, c| m.max(c.relative_tolerance));
    let checked = checks
        .iter()
        .flat_map(|c| c.levels.iter())
        .map(|l| (l.k, l.kind, l.l, l.measured.iter().sum::<f64>() / l.measured.len() as f64))
        .collect();
    let mut out = data.clone();
    out.trusted = true;
    out.validation = Some(SphereValidation { method: method.to_string(), relative_tolerance: tol, checked });
    Ok(out)
}
