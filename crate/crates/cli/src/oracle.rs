use std::path::{Path, PathBuf};

use serde::Serialize;
use tractorforms::spectral::{sphere_data_path, SphereData};
use tractorforms::torus::{compare_random, TorusReport};
use tractorforms_dec::{analyze, build_mesh, DecReport, EigenConfig, MeshPreset, SimplicialMesh, SphereCheck};

use crate::output::{cache_dir, Envelope, OutFile};
use crate::{CliError, DecArgs, Result, TorusArgs};

pub const TORUS_SCHEMA: &str = "tractorforms.torus/1";

pub fn torus(a: &TorusArgs) -> Result<()> {
    if a.modes == 0 {
        return Err(CliError::Usage("--modes must be positive".into()));
    }
    let out = OutFile::create_opt(a.output.as_ref())?;
    let rep: TorusReport = compare_random(a.n, a.k, a.ell, a.modes, a.seed)?;
    if let Some(f) = out {
        f.write(&Envelope::new(TORUS_SCHEMA, &rep).to_json()?)?;
    }
    let bad: Vec<_> = rep.modes.iter().filter(|m| !m.exact()).collect();
    println!(
        "torus n={} k={} ell={} seed={}: {}/{} modes exact",
        rep.n,
        rep.k,
        rep.ell,
        rep.seed,
        rep.modes.len() - bad.len(),
        rep.modes.len()
    );
    if bad.is_empty() {
        return Ok(());
    }
    for m in &bad {
        eprintln!(
            "mode {:?}: |L discrepancy| = {}, |G discrepancy| = {}, slots vanish = {}, real = {}",
            m.xi, m.l_discrepancy, m.g_discrepancy, m.slots_vanish, m.real
        );
    }
    Err(CliError::Failed(format!("{} of {} modes disagree", bad.len(), rep.modes.len())))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecConfig {
    pub mesh: MeshPreset,
    pub k: usize,
    pub eigs: usize,
    pub subdivisions: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecRun {
    pub config: DecConfig,
    pub expected_betti: [usize; 4],
    /// One entry per refinement level, coarsest first.
    pub levels: Vec<DecReport>,
    /// Sphere check errors shrink with every refinement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improving: Option<bool>,
    pub passed: bool,
}

pub fn expected_betti(p: MeshPreset) -> [usize; 4] {
    if p.is_sphere() {
        [1, 0, 0, 1]
    } else {
        [1, 3, 3, 1]
    }
}

fn file_stem(mesh_name: &str) -> String {
    mesh_name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '+' { c } else { '-' }).collect()
}

fn cached_mesh(dir: &Path, preset: MeshPreset, level: u32, coarser: Option<&SimplicialMesh>) -> Result<SimplicialMesh> {
    let name = if level == 0 { preset.to_string() } else { format!("{preset}+sd{level}") };
    let path = dir.join(format!("mesh-{}.json", file_stem(&name)));
    if let Ok(s) = std::fs::read_to_string(&path) {
        match SimplicialMesh::from_json(&s) {
            Ok(m) if m.preset == preset && m.subdivisions == level => return Ok(m),
            _ => eprintln!("warning: ignoring stale cache file {}", path.display()),
        }
    }
    let mesh = match coarser {
        Some(c) => c.subdivide()?,
        None => build_mesh(preset)?,
    };
    let stored = std::fs::create_dir_all(dir).and_then(|_| {
        std::fs::write(&path, mesh.to_json().map_err(|e| std::io::Error::other(e.to_string()))?)
    });
    if let Err(e) = stored {
        eprintln!("warning: cannot cache mesh at {}: {e}", path.display());
    }
    Ok(mesh)
}

fn print_level(r: &DecReport) {
    let f = r.f_vector;
    let b = r.betti;
    println!("{}: f-vector ({}, {}, {}, {}), betti ({}, {}, {}, {})", r.mesh, f[0], f[1], f[2], f[3], b[0], b[1], b[2], b[3]);
    for w in &r.warnings {
        println!("  warning: {w}");
    }
    let show = |v: &[f64]| v.iter().take(12).map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    println!("  k={} harmonic {}", r.spectrum.k, r.spectrum.harmonic);
    if !r.spectrum.exact.is_empty() {
        println!("  exact   {}", show(&r.spectrum.exact));
    }
    println!("  coexact {}", show(&r.spectrum.coexact));
    if let Some(c) = &r.sphere_check {
        for l in &c.levels {
            println!(
                "  {:?} l={} expected {} x{}: max relative error {:.2}% {}",
                l.kind,
                l.l,
                l.expected,
                l.multiplicity,
                100.0 * l.max_relative_error,
                if l.passed { "ok" } else { "FAIL" }
            );
        }
    }
}

pub fn dec(a: &DecArgs) -> Result<()> {
    let preset = MeshPreset::parse(&a.mesh, a.size)?;
    if a.k > 3 {
        return Err(CliError::Usage(format!("--k {} exceeds the dimension 3", a.k)));
    }
    if a.eigs == 0 {
        return Err(CliError::Usage("--eigs must be positive".into()));
    }
    let subdivisions = a.subdivide.unwrap_or(0);
    let table = if preset == MeshPreset::Cell600 {
        let path = sphere_data_path(3);
        let d = SphereData::read(&path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Some(d).filter(|d| d.entries.iter().any(|e| e.k as usize == a.k))
    } else {
        None
    };
    if (a.promote || a.export_model.is_some()) && table.is_none() {
        return Err(CliError::Usage("--promote and --export-model need --mesh cell600 and a tabulated degree".into()));
    }
    let out = OutFile::create_opt(a.output.as_ref())?;
    let model_out = OutFile::create_opt(a.export_model.as_ref())?;

    let dir = cache_dir();
    let cfg = EigenConfig::default();
    let mut levels: Vec<DecReport> = Vec::new();
    let mut mesh: Option<SimplicialMesh> = None;
    for level in 0..=subdivisions {
        let m = cached_mesh(&dir, preset, level, mesh.as_ref())?;
        let f = m.f_vector();
        let cap = if a.k == 0 { f[0] } else { f[a.k].min(f[a.k - 1]) };
        if a.eigs > cap {
            eprintln!("note: {} has room for {cap} eigenvalues per kind, using that", m.name());
        }
        let r = analyze(&m, a.k, a.eigs.min(cap), table.as_ref(), &cfg)?;
        print_level(&r);
        levels.push(r);
        mesh = Some(m);
    }

    let expected = expected_betti(preset);
    let checks: Vec<&SphereCheck> = levels.iter().filter_map(|r| r.sphere_check.as_ref()).collect();
    let improving = (checks.len() > 1).then(|| checks.windows(2).all(|w| w[1].max_error() < w[0].max_error()));
    let finest = levels.last().expect("at least one level");
    let topology_ok = levels.iter().all(|r| r.betti == expected && r.euler_consistent());
    let sphere_ok = finest.sphere_check.as_ref().is_none_or(|c| c.passed) && improving.unwrap_or(true);
    let run = DecRun {
        config: DecConfig { mesh: preset, k: a.k, eigs: a.eigs, subdivisions },
        expected_betti: expected,
        levels: levels.clone(),
        improving,
        passed: topology_ok && sphere_ok,
    };
    if let Some(f) = out {
        f.write(&Envelope::new(tractorforms_dec::REPORT_SCHEMA, &run).to_json()?)?;
    }
    if let (Some(f), Some(data), Some(check)) = (model_out, table.as_ref(), finest.sphere_check.as_ref()) {
        let model = tractorforms_dec::to_model(&finest.spectrum, data, check)?;
        f.write(&(model.to_json()? + "\n"))?;
    }

    let mut problems = Vec::new();
    for r in levels.iter().filter(|r| r.betti != expected) {
        problems.push(format!("{}: betti {:?}, expected {:?}", r.mesh, r.betti, expected));
    }
    for r in levels.iter().filter(|r| !r.euler_consistent()) {
        problems.push(format!("{}: betti numbers disagree with Euler characteristic {}", r.mesh, r.euler_characteristic));
    }
    if let Some(c) = finest.sphere_check.as_ref().filter(|c| !c.passed) {
        for l in c.levels.iter().filter(|l| !l.passed) {
            problems.push(format!(
                "{}: {:?} l={} expected {} measured {:?} ({:.2}% > {:.0}%)",
                c.mesh,
                l.kind,
                l.l,
                l.expected,
                l.measured,
                100.0 * l.max_relative_error,
                100.0 * c.relative_tolerance
            ));
        }
    }
    if improving == Some(false) {
        problems.push("sphere discrepancy did not shrink under subdivision".into());
    }

    if a.promote {
        if !run.passed {
            problems.push("sphere table not promoted".into());
        } else if let (Some(data), Some(check)) = (table.as_ref(), finest.sphere_check.as_ref()) {
            let method = format!("dec k={} on {}", a.k, finest.mesh);
            let promoted = tractorforms_dec::promote(data, std::slice::from_ref(check), &method)?;
            let path: PathBuf = dir.join("sphere_s3.json");
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            promoted.write(&path)?;
            println!("trusted sphere table written to {} (use it with TRACTORFORMS_DATA={})", path.display(), dir.display());
        }
    }

    if problems.is_empty() {
        println!("dec oracle passed");
        return Ok(());
    }
    for p in &problems {
        eprintln!("{p}");
    }
    Err(CliError::Failed(format!("dec oracle failed ({} problems)", problems.len())))
}
