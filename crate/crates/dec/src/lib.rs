//! Discrete exterior calculus on triangulated closed 3-manifolds: Betti
//! numbers by exact rank computation and low Hodge spectra split into exact
//! and coexact parts.

pub mod complex;
pub mod eigen;
pub mod hodge;
pub mod mesh;
pub mod sparse;
pub mod spectrum;

use serde::{Deserialize, Serialize};
use tractorforms::spectral::SphereData;

pub use complex::{betti_numbers, check_chain_complex, coboundaries, Incidence};
pub use eigen::{lowest_eigenpairs, EigenConfig};
pub use hodge::{hodge_stars, Dec, DualKind, Stars};
pub use mesh::{build_mesh, build_refined, MeshPreset, SimplicialMesh};
pub use spectrum::{check_sphere, promote, spectrum, to_model, PointKind, SphereCheck, Spectrum};

pub const REPORT_SCHEMA: &str = "tractorforms.dec/1";

/// Relative tolerance of the sphere sanity gate.
pub const SPHERE_TOLERANCE: f64 = 0.10;

/// Tabulated eigenspaces of each kind compared by the sphere gate.
pub const SPHERE_LEVELS: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum DecError {
    #[error("invalid mesh preset: {0}")]
    InvalidPreset(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("degenerate mesh: {0}")]
    Degenerate(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Core(#[from] tractorforms::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DecError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecReport {
    pub schema: String,
    pub mesh: String,
    pub f_vector: [usize; 4],
    pub euler_characteristic: i64,
    pub betti: [usize; 4],
    pub inner_duals: [DualKind; 4],
    pub weight_duals: [DualKind; 4],
    pub warnings: Vec<String>,
    pub spectrum: Spectrum,
    #[serde(default)]
    pub sphere_check: Option<SphereCheck>,
}

impl DecReport {
    /// Betti numbers must match the alternating face count.
    pub fn euler_consistent(&self) -> bool {
        let b = self.betti;
        b[0] as i64 - b[1] as i64 + b[2] as i64 - b[3] as i64 == self.euler_characteristic
    }
}

/// Full oracle run on an already built mesh. `sphere` enables the
/// comparison with a unit S³ table.
pub fn analyze(mesh: &SimplicialMesh, k: usize, eigs: usize, sphere: Option<&SphereData>, cfg: &EigenConfig) -> Result<DecReport> {
    let dec = Dec::new(mesh)?;
    let betti = dec.betti;
    let spec = spectrum(&dec, k, eigs, cfg)?;
    let sphere_check = match sphere {
        Some(data) if mesh.preset.is_sphere() => Some(check_sphere(&mesh.name(), &spec, data, SPHERE_LEVELS, SPHERE_TOLERANCE)?),
        _ => None,
    };
    Ok(DecReport {
        schema: REPORT_SCHEMA.to_string(),
        mesh: mesh.name(),
        f_vector: mesh.f_vector(),
        euler_characteristic: mesh.euler_characteristic(),
        betti,
        inner_duals: dec.stars.inner_kind,
        weight_duals: dec.stars.weight_kind,
        warnings: dec.stars.warnings.clone(),
        spectrum: spec,
        sphere_check,
    })
}
