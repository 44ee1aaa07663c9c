//! Triangulated closed 3-manifolds: presets and barycentric refinement.
//!
//! Geometry is stored per tetrahedron as a local chart (`frames`), so
//! periodic meshes never need a global embedding. Every metric quantity of
//! a face is computed inside a chart of a tetrahedron that contains it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{DecError, Result};

pub const MESH_VERSION: u32 = 1;

const PHI: f64 = 1.618_033_988_749_895;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum MeshPreset {
    Torus3Grid { m: usize },
    Boundary4Simplex,
    Cell600,
}

impl MeshPreset {
    /// Parses a preset name; `size` is only used (and required) by the torus.
    pub fn parse(name: &str, size: Option<usize>) -> Result<Self> {
        match name {
            "torus3-grid" | "torus" => {
                let m = size.ok_or_else(|| DecError::InvalidPreset("torus3-grid needs a size".into()))?;
                if m < 3 {
                    return Err(DecError::InvalidPreset(format!("torus3-grid needs m >= 3, got {m}")));
                }
                Ok(MeshPreset::Torus3Grid { m })
            }
            "boundary-4-simplex" => Ok(MeshPreset::Boundary4Simplex),
            "cell600" | "600-cell" => Ok(MeshPreset::Cell600),
            other => Err(DecError::InvalidPreset(format!("unknown mesh preset `{other}`"))),
        }
    }

    pub fn is_sphere(&self) -> bool {
        !matches!(self, MeshPreset::Torus3Grid { .. })
    }
}

impl fmt::Display for MeshPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshPreset::Torus3Grid { m } => write!(f, "torus3-grid({m})"),
            MeshPreset::Boundary4Simplex => write!(f, "boundary-4-simplex"),
            MeshPreset::Cell600 => write!(f, "cell600"),
        }
    }
}

impl FromStr for MeshPreset {
    type Err = DecError;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("torus3-grid(") {
            let m = rest
                .strip_suffix(')')
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| DecError::InvalidPreset(s.to_string()))?;
            return MeshPreset::parse("torus3-grid", Some(m));
        }
        MeshPreset::parse(s, None)
    }
}

pub type Point = Vec<f64>;

/// A closed pure 3-dimensional simplicial complex with per-tet charts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplicialMesh {
    pub version: u32,
    pub preset: MeshPreset,
    pub subdivisions: u32,
    /// Representative coordinates; for the torus these are in the
    /// fundamental domain and only informational.
    pub vertices: Vec<Point>,
    /// Sorted vertex tuples, per dimension 0..=3, lexicographically ordered.
    pub simplices: Vec<Vec<Vec<usize>>>,
    /// For each tetrahedron, coordinates of its (sorted) vertices.
    pub frames: Vec<[Point; 4]>,
    /// Whether refinement pushes new vertices onto the unit sphere.
    pub spherical: bool,
}

impl SimplicialMesh {
    pub fn f_vector(&self) -> [usize; 4] {
        [
            self.simplices[0].len(),
            self.simplices[1].len(),
            self.simplices[2].len(),
            self.simplices[3].len(),
        ]
    }

    pub fn euler_characteristic(&self) -> i64 {
        let f = self.f_vector();
        f[0] as i64 - f[1] as i64 + f[2] as i64 - f[3] as i64
    }

    pub fn name(&self) -> String {
        if self.subdivisions == 0 {
            self.preset.to_string()
        } else {
            format!("{}+sd{}", self.preset, self.subdivisions)
        }
    }

    pub fn index(&self, dim: usize) -> HashMap<Vec<usize>, usize> {
        self.simplices[dim].iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()
    }

    fn from_tets(preset: MeshPreset, vertices: Vec<Point>, tets: Vec<(Vec<usize>, [Point; 4])>, spherical: bool, subdivisions: u32) -> Result<Self> {
        let mut sorted: Vec<(Vec<usize>, [Point; 4])> = tets
            .into_iter()
            .map(|(t, fr)| {
                let mut order: Vec<usize> = (0..4).collect();
                order.sort_by_key(|&i| t[i]);
                let verts: Vec<usize> = order.iter().map(|&i| t[i]).collect();
                let frame = [fr[order[0]].clone(), fr[order[1]].clone(), fr[order[2]].clone(), fr[order[3]].clone()];
                (verts, frame)
            })
            .collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(DecError::Degenerate(format!("tetrahedron {:?} appears twice", w[0].0)));
            }
        }
        let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); 4];
        for (d, faces) in simplices.iter_mut().take(3).enumerate() {
            for (t, _) in &sorted {
                for_each_subset(4, d + 1, |sub| faces.push(sub.iter().map(|&i| t[i]).collect()));
            }
            faces.sort();
            faces.dedup();
        }
        let frames = sorted.iter().map(|(_, f)| f.clone()).collect();
        simplices[3] = sorted.into_iter().map(|(t, _)| t).collect();
        if simplices[0].len() != vertices.len() {
            return Err(DecError::Degenerate(format!(
                "{} vertices declared but {} used",
                vertices.len(),
                simplices[0].len()
            )));
        }
        let mesh = SimplicialMesh { version: MESH_VERSION, preset, subdivisions, vertices, simplices, frames, spherical };
        mesh.check_pseudomanifold()?;
        Ok(mesh)
    }

    /// Every triangle must bound exactly two tetrahedra.
    fn check_pseudomanifold(&self) -> Result<()> {
        let idx = self.index(2);
        let mut count = vec![0u32; self.simplices[2].len()];
        for t in &self.simplices[3] {
            for_each_subset(4, 3, |sub| {
                let f: Vec<usize> = sub.iter().map(|&i| t[i]).collect();
                count[idx[&f]] += 1;
            });
        }
        if let Some(i) = count.iter().position(|&c| c != 2) {
            return Err(DecError::Degenerate(format!(
                "triangle {:?} bounds {} tetrahedra",
                self.simplices[2][i], count[i]
            )));
        }
        Ok(())
    }

    /// One barycentric subdivision. On spherical meshes new vertices are
    /// projected radially onto the unit sphere.
    pub fn subdivide(&self) -> Result<Self> {
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut vertices = self.vertices.clone();
        for (i, s) in self.simplices[0].iter().enumerate() {
            ids.insert(s.clone(), i);
        }
        let mut tets = Vec::with_capacity(self.frames.len() * 24);
        for (t, frame) in self.simplices[3].iter().zip(&self.frames) {
            // local barycenters of all 15 faces, keyed by bitmask
            let mut local: HashMap<u8, (usize, Point)> = HashMap::new();
            for mask in 1u8..16 {
                let members: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
                let key: Vec<usize> = members.iter().map(|&i| t[i]).collect();
                let mut p = vec![0.0; frame[0].len()];
                for &i in &members {
                    for (pj, fj) in p.iter_mut().zip(&frame[i]) {
                        *pj += fj / members.len() as f64;
                    }
                }
                if self.spherical && members.len() > 1 {
                    let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                    p.iter_mut().for_each(|x| *x /= r);
                }
                let id = *ids.entry(key).or_insert_with(|| {
                    vertices.push(p.clone());
                    vertices.len() - 1
                });
                local.insert(mask, (id, p));
            }
            for perm in permutations4() {
                let mut mask = 0u8;
                let mut verts = Vec::with_capacity(4);
                let mut pts: Vec<Point> = Vec::with_capacity(4);
                for &i in &perm {
                    mask |= 1 << i;
                    let (id, p) = &local[&mask];
                    verts.push(*id);
                    pts.push(p.clone());
                }
                let [a, b, c, d]: [Point; 4] = pts.try_into().unwrap();
                tets.push((verts, [a, b, c, d]));
            }
        }
        Self::from_tets(self.preset, vertices, tets, self.spherical, self.subdivisions + 1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SimplicialMesh = serde_json::from_str(s)?;
        if m.version != MESH_VERSION {
            return Err(DecError::InvalidPreset(format!("unsupported mesh cache version {}", m.version)));
        }
        Ok(m)
    }
}

pub fn build_mesh(preset: MeshPreset) -> Result<SimplicialMesh> {
    match preset {
        MeshPreset::Torus3Grid { m } => torus_grid(m),
        MeshPreset::Boundary4Simplex => boundary_simplex(),
        MeshPreset::Cell600 => cell600(),
    }
}

/// Builds `preset` and applies `subdivisions` barycentric refinements.
pub fn build_refined(preset: MeshPreset, subdivisions: u32) -> Result<SimplicialMesh> {
    let mut m = build_mesh(preset)?;
    for _ in 0..subdivisions {
        m = m.subdivide()?;
    }
    Ok(m)
}

fn torus_grid(m: usize) -> Result<SimplicialMesh> {
    if m < 3 {
        return Err(DecError::InvalidPreset(format!("torus3-grid needs m >= 3, got {m}")));
    }
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let id = |i: usize, j: usize, k: usize| ((i % m) * m + j % m) * m + k % m;
    let mut vertices = vec![Vec::new(); m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                vertices[id(i, j, k)] = vec![i as f64 * h, j as f64 * h, k as f64 * h];
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    let mut c = [i, j, k];
                    let mut verts = vec![id(c[0], c[1], c[2])];
                    let mut pts: Vec<Point> = vec![vec![c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]];
                    for axis in perm {
                        c[axis] += 1;
                        verts.push(id(c[0], c[1], c[2]));
                        pts.push(vec![c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]);
                    }
                    let [a, b, cc, d]: [Point; 4] = pts.try_into().unwrap();
                    tets.push((verts, [a, b, cc, d]));
                }
            }
        }
    }
    SimplicialMesh::from_tets(MeshPreset::Torus3Grid { m }, vertices, tets, false, 0)
}

fn boundary_simplex() -> Result<SimplicialMesh> {
    // regular 4-simplex inscribed in the unit 3-sphere of its hyperplane
    let c = 0.2;
    let r = ((1.0f64 - c) * (1.0 - c) + 4.0 * c * c).sqrt();
    let vertices: Vec<Point> = (0..5)
        .map(|i| (0..5).map(|j| ((if i == j { 1.0 } else { 0.0 }) - c) / r).collect())
        .collect();
    let mut tets = Vec::new();
    for_each_subset(5, 4, |sub| {
        let pts: Vec<Point> = sub.iter().map(|&i| vertices[i].clone()).collect();
        let [a, b, cc, d]: [Point; 4] = pts.try_into().unwrap();
        tets.push((sub.to_vec(), [a, b, cc, d]));
    });
    SimplicialMesh::from_tets(MeshPreset::Boundary4Simplex, vertices, tets, true, 0)
}

/// The 600-cell: vertices are the 120 unit quaternions of the binary
/// icosahedral group, edges join vertices at distance 1/φ.
fn cell600() -> Result<SimplicialMesh> {
    let mut v: Vec<Point> = Vec::with_capacity(120);
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut p = vec![0.0; 4];
            p[i] = s;
            v.push(p);
        }
    }
    for bits in 0..16 {
        v.push((0..4).map(|i| if bits & (1 << i) != 0 { -0.5 } else { 0.5 }).collect());
    }
    let base = [PHI / 2.0, 0.5, 1.0 / (2.0 * PHI), 0.0];
    for perm in permutations4().into_iter().filter(|p| parity(p) == 0) {
        for signs in 0..8 {
            let mut p = vec![0.0; 4];
            for (slot, &target) in perm.iter().enumerate() {
                let mut x = base[slot];
                if slot < 3 && signs & (1 << slot) != 0 {
                    x = -x;
                }
                p[target] = x;
            }
            v.push(p);
        }
    }
    debug_assert_eq!(v.len(), 120);
    let edge = 1.0 / PHI;
    let n = v.len();
    let dist = |a: &Point, b: &Point| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            adj[i][j] = i != j && (dist(&v[i], &v[j]) - edge).abs() < 1e-9;
        }
    }
    let mut tets = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !adj[a][b] {
                continue;
            }
            for c in b + 1..n {
                if !(adj[a][c] && adj[b][c]) {
                    continue;
                }
                for d in c + 1..n {
                    if adj[a][d] && adj[b][d] && adj[c][d] {
                        tets.push((vec![a, b, c, d], [v[a].clone(), v[b].clone(), v[c].clone(), v[d].clone()]));
                    }
                }
            }
        }
    }
    SimplicialMesh::from_tets(MeshPreset::Cell600, v, tets, true, 0)
}

pub(crate) fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

fn parity(p: &[usize; 4]) -> usize {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

/// Calls `f` with every `r`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    if r > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets() {
        let mut v = Vec::new();
        for_each_subset(4, 2, |s| v.push(s.to_vec()));
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], vec![0, 1]);
        assert_eq!(v[5], vec![2, 3]);
        let mut c = 0;
        for_each_subset(3, 3, |_| c += 1);
        assert_eq!(c, 1);
    }

    #[test]
    fn preset_f_vectors() {
        assert_eq!(build_mesh(MeshPreset::Boundary4Simplex).unwrap().f_vector(), [5, 10, 10, 5]);
        let c = build_mesh(MeshPreset::Cell600).unwrap();
        assert_eq!(c.f_vector(), [120, 720, 1200, 600]);
        assert_eq!(c.euler_characteristic(), 0);
        let t = build_mesh(MeshPreset::Torus3Grid { m: 3 }).unwrap();
        assert_eq!(t.f_vector()[3], 162);
        assert_eq!(t.euler_characteristic(), 0);
    }

    #[test]
    fn small_torus_is_rejected() {
        assert!(MeshPreset::parse("torus3-grid", Some(2)).is_err());
        assert!(MeshPreset::parse("klein", None).is_err());
        assert_eq!("torus3-grid(4)".parse::<MeshPreset>().unwrap(), MeshPreset::Torus3Grid { m: 4 });
    }

    #[test]
    fn subdivision_counts() {
        let m = build_mesh(MeshPreset::Boundary4Simplex).unwrap().subdivide().unwrap();
        assert_eq!(m.f_vector()[3], 5 * 24);
        assert_eq!(m.euler_characteristic(), 0);
        for p in &m.vertices {
            let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_json_round_trip() {
        let m = build_mesh(MeshPreset::Boundary4Simplex).unwrap();
        let back = SimplicialMesh::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.simplices, m.simplices);
    }
}
