//! Diagonal Hodge stars and the up/down Laplacian pieces.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::{coboundaries, Incidence};
use crate::mesh::{permutations4, SimplicialMesh};
use crate::sparse::{Csr, GramSum};
use crate::{DecError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualKind {
    Circumcentric,
    Barycentric,
}

/// Ratios dual volume / primal volume per degree.
///
/// Degree `k` has an inner-product star (inverted when forming `⋆⁻¹`, so
/// it must be positive) and a weight star (only multiplied, so vanishing
/// entries are fine). Both are circumcentric when possible; a degree whose
/// circumcentric entries vanish falls back to barycentric for the inner
/// product only, and one with negative entries falls back entirely.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stars {
    pub inner_kind: [DualKind; 4],
    pub weight_kind: [DualKind; 4],
    inner: Vec<Vec<f64>>,
    weight: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Stars {
    pub fn inner(&self, k: usize) -> &[f64] {
        &self.inner[k]
    }

    pub fn weight(&self, k: usize) -> &[f64] {
        &self.weight[k]
    }

    pub fn well_centered(&self) -> bool {
        self.inner_kind.iter().chain(&self.weight_kind).all(|&k| k == DualKind::Circumcentric)
    }

    /// Copy whose degree-`k` weight is the inner-product star.
    pub fn without_vanishing_weight(&self, k: usize) -> Stars {
        let mut s = self.clone();
        s.weight[k] = s.inner[k].clone();
        s.weight_kind[k] = s.inner_kind[k];
        s
    }

    pub fn min_inner(&self) -> f64 {
        self.inner.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

struct Center {
    point: Vec<f64>,
    bary: Vec<f64>,
}

fn center(pts: &[&Vec<f64>], kind: DualKind) -> Result<Center> {
    let m = pts.len();
    if m == 1 || kind == DualKind::Barycentric {
        let dim = pts[0].len();
        let point = (0..dim).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / m as f64).collect();
        return Ok(Center { point, bary: vec![1.0 / m as f64; m] });
    }
    let a = edge_matrix(pts);
    let g = &a * a.transpose();
    let b = DVector::from_iterator(m - 1, (0..m - 1).map(|i| a.row(i).norm_squared() / 2.0));
    let x = g
        .lu()
        .solve(&b)
        .ok_or_else(|| DecError::Degenerate("degenerate simplex in circumcenter".into()))?;
    let c = a.transpose() * &x;
    let point = pts[0].iter().zip(c.iter()).map(|(p, d)| p + d).collect();
    let mut bary = vec![1.0 - x.sum()];
    bary.extend(x.iter());
    Ok(Center { point, bary })
}

fn edge_matrix(pts: &[&Vec<f64>]) -> DMatrix<f64> {
    let dim = pts[0].len();
    DMatrix::from_fn(pts.len() - 1, dim, |i, j| pts[i + 1][j] - pts[0][j])
}

/// Unsigned `(m-1)`-volume of the simplex spanned by `pts`.
pub fn simplex_volume(pts: &[&Vec<f64>]) -> f64 {
    if pts.len() == 1 {
        return 1.0;
    }
    let a = edge_matrix(pts);
    let det = (&a * a.transpose()).determinant().max(0.0);
    let fact: f64 = (1..pts.len()).map(|i| i as f64).product();
    det.sqrt() / fact
}

/// Signed dual volumes (a signed elementary-dual sum over flags) divided by
/// primal volumes.
pub fn stars_of_kind(mesh: &SimplicialMesh, kind: DualKind) -> Result<Vec<Vec<f64>>> {
    let idx: Vec<HashMap<Vec<usize>, usize>> = (0..4).map(|d| mesh.index(d)).collect();
    let f = mesh.f_vector();
    let mut dual: Vec<Vec<f64>> = f.iter().map(|&n| vec![0.0; n]).collect();
    let mut primal: Vec<Vec<f64>> = f.iter().map(|&n| vec![f64::NAN; n]).collect();
    let perms = permutations4();
    for (t, frame) in mesh.simplices[3].iter().zip(&mesh.frames) {
        let mut centers: HashMap<u8, Center> = HashMap::new();
        let mut face_id: HashMap<u8, usize> = HashMap::new();
        for mask in 1u8..16 {
            let loc: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            let pts: Vec<&Vec<f64>> = loc.iter().map(|&i| &frame[i]).collect();
            let d = loc.len() - 1;
            let key: Vec<usize> = loc.iter().map(|&i| t[i]).collect();
            let id = idx[d][&key];
            if primal[d][id].is_nan() {
                primal[d][id] = simplex_volume(&pts);
            }
            face_id.insert(mask, id);
            centers.insert(mask, center(&pts, kind)?);
        }
        for perm in &perms {
            let mut flag = [0u8; 4];
            let mut acc = 0u8;
            for (m, &i) in perm.iter().enumerate() {
                acc |= 1 << i;
                flag[m] = acc;
            }
            for k in 0..4 {
                let pts: Vec<&Vec<f64>> = (k..4).map(|m| &centers[&flag[m]].point).collect();
                let mut sign = 1.0;
                if kind == DualKind::Circumcentric {
                    for m in k..3 {
                        let big = flag[m + 1];
                        let opp = (big & !flag[m]).trailing_zeros() as u8;
                        let pos = (0..opp).filter(|i| big & (1 << i) != 0).count();
                        let lam = centers[&big].bary[pos];
                        sign *= if lam.abs() < 1e-12 { 0.0 } else { lam.signum() };
                    }
                }
                let vol = if k < 3 { simplex_volume(&pts) } else { 1.0 };
                let fact: f64 = (1..=k + 1).map(|i| i as f64).product();
                dual[k][face_id[&flag[k]]] += sign * vol / fact;
            }
        }
    }
    Ok(dual.into_iter().zip(primal).map(|(d, p)| d.iter().zip(&p).map(|(a, b)| a / b).collect()).collect())
}

pub fn hodge_stars(mesh: &SimplicialMesh) -> Result<Stars> {
    let circ = stars_of_kind(mesh, DualKind::Circumcentric)?;
    let mut bary: Option<Vec<Vec<f64>>> = None;
    let mut inner = Vec::with_capacity(4);
    let mut weight = Vec::with_capacity(4);
    let mut inner_kind = [DualKind::Circumcentric; 4];
    let mut weight_kind = [DualKind::Circumcentric; 4];
    let mut warnings = Vec::new();
    for (k, c) in circ.into_iter().enumerate() {
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * scale;
        let negative = c.iter().filter(|&&v| v < -tol).count();
        let vanishing = c.iter().filter(|&&v| v.abs() <= tol).count();
        if negative == 0 && vanishing == 0 {
            inner.push(c.clone());
            weight.push(c);
            continue;
        }
        if bary.is_none() {
            bary = Some(stars_of_kind(mesh, DualKind::Barycentric)?);
        }
        let b = bary.as_ref().unwrap()[k].clone();
        inner_kind[k] = DualKind::Barycentric;
        inner.push(b.clone());
        if negative == 0 {
            warnings.push(format!(
                "{}: {vanishing} circumcentric {k}-dual volumes vanish; barycentric star used where inverted",
                mesh.name()
            ));
            weight.push(c.into_iter().map(|v| v.max(0.0)).collect());
        } else {
            warnings.push(format!("{}: {negative} circumcentric {k}-dual volumes are negative; using barycentric duals", mesh.name()));
            weight_kind[k] = DualKind::Barycentric;
            weight.push(b);
        }
    }
    Ok(Stars { inner_kind, weight_kind, inner, weight, warnings })
}

/// Everything needed to apply `δd` and `dδ` on a mesh.
#[derive(Clone, Debug)]
pub struct Dec {
    pub d: Vec<Incidence>,
    /// Exact ranks of `d_0, d_1, d_2`.
    pub ranks: [usize; 3],
    pub betti: [usize; 4],
    pub dcsr: Vec<Csr>,
    pub stars: Stars,
}

impl Dec {
    pub fn new(mesh: &SimplicialMesh) -> Result<Self> {
        let d = coboundaries(mesh);
        crate::complex::check_chain_complex(&d)?;
        let dcsr = d.iter().map(|x| x.to_csr()).collect();
        let ranks = crate::complex::ranks(&d);
        let betti = crate::complex::betti_from_ranks(mesh.f_vector(), ranks);
        Ok(Dec { d, ranks, betti, dcsr, stars: hodge_stars(mesh)? })
    }

    pub fn dim(&self, k: usize) -> usize {
        self.stars.inner(k).len()
    }

    /// `(up, down)` on `k`-forms: `up = ⋆⁻¹ dᵀ ⋆ d` and `down = d ⋆⁻¹ dᵀ ⋆`.
    /// Both are self-adjoint for the inner-product star of degree `k`.
    pub fn hodge_operators(&self, k: usize) -> Result<(Csr, Csr)> {
        if k > 3 {
            return Err(DecError::InvalidParameters(format!("degree {k} exceeds 3")));
        }
        let n = self.dim(k);
        let st = &self.stars;
        let inv = |v: &[f64]| v.iter().map(|x| 1.0 / x).collect::<Vec<_>>();
        let ones = |m: usize| vec![1.0; m];
        let up = if k < 3 {
            let d = &self.dcsr[k];
            d.transpose().scaled(&inv(st.inner(k)), st.weight(k + 1)).mul(d)
        } else {
            Csr::from_triplets(n, n, Vec::new())
        };
        let down = if k > 0 {
            let d = &self.dcsr[k - 1];
            d.scaled(&ones(n), &inv(st.inner(k - 1))).mul(&d.transpose().scaled(&ones(st.inner(k - 1).len()), st.inner(k)))
        } else {
            Csr::from_triplets(n, n, Vec::new())
        };
        Ok((up, down))
    }

    /// Symmetrized pieces `⋆^{1/2} · op · ⋆^{-1/2}`, which share the spectra
    /// of [`Dec::hodge_operators`].
    pub fn symmetric_operators(&self, k: usize) -> Result<(Csr, Csr)> {
        let (up, down) = self.hodge_operators(k)?;
        let sq: Vec<f64> = self.stars.inner(k).iter().map(|x| x.sqrt()).collect();
        let isq: Vec<f64> = sq.iter().map(|x| 1.0 / x).collect();
        Ok((up.scaled(&sq, &isq), down.scaled(&sq, &isq)))
    }

    /// `up_weight · BᵀB + down_weight · CᵀC`, the symmetrized
    /// `up_weight·δd + down_weight·dδ` on `k`-forms in factored form, with
    /// `B = ⋆^{1/2} d ⋆^{-1/2}` and `C = ⋆^{-1/2} dᵀ ⋆^{1/2}`.
    pub fn laplacian(&self, k: usize, up_weight: f64, down_weight: f64) -> Result<GramSum> {
        if k > 3 {
            return Err(DecError::InvalidParameters(format!("degree {k} exceeds 3")));
        }
        let st = &self.stars;
        let sqrt = |v: &[f64]| v.iter().map(|x| x.sqrt()).collect::<Vec<_>>();
        let isqrt = |v: &[f64]| v.iter().map(|x| 1.0 / x.sqrt()).collect::<Vec<_>>();
        let mut terms = Vec::new();
        if k < 3 && up_weight != 0.0 {
            terms.push((up_weight, self.dcsr[k].scaled(&sqrt(st.weight(k + 1)), &isqrt(st.inner(k)))));
        }
        if k > 0 && down_weight != 0.0 {
            terms.push((down_weight, self.dcsr[k - 1].transpose().scaled(&isqrt(st.inner(k - 1)), &sqrt(st.inner(k)))));
        }
        Ok(GramSum::new(self.dim(k), terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, MeshPreset};

    #[test]
    fn cell600_is_well_centered() {
        let m = build_mesh(MeshPreset::Cell600).unwrap();
        let s = hodge_stars(&m).unwrap();
        assert!(s.well_centered());
        assert!(s.min_inner() > 0.0);
        // regular: one value per degree
        for d in (0..4).map(|k| s.inner(k)) {
            let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            assert!((hi - lo) / hi < 1e-9);
        }
    }

    #[test]
    fn dual_volumes_tile_the_mesh() {
        let m = build_mesh(MeshPreset::Cell600).unwrap();
        let s = hodge_stars(&m).unwrap();
        // star_0 entries are dual cell volumes; they sum to the total volume
        let total_dual: f64 = s.inner(0).iter().sum();
        let total: f64 = s.inner(3).iter().map(|x| 1.0 / x).sum();
        assert!((total_dual - total).abs() < 1e-9 * total);
    }

    #[test]
    fn kuhn_torus_falls_back() {
        let m = build_mesh(MeshPreset::Torus3Grid { m: 3 }).unwrap();
        let s = hodge_stars(&m).unwrap();
        assert!(s.min_inner() > 0.0);
        assert!(!s.well_centered());
        assert_eq!(s.warnings.len(), s.inner_kind.iter().filter(|&&k| k == DualKind::Barycentric).count());
        // vertex duals stay circumcentric, so the function Laplacian is the
        // consistent cotangent one
        assert_eq!(s.inner_kind[0], DualKind::Circumcentric);
        assert!(s.weight(1).iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn up_and_down_annihilate_each_other() {
        let m = build_mesh(MeshPreset::Boundary4Simplex).unwrap();
        let dec = Dec::new(&m).unwrap();
        let (_, down0) = dec.hodge_operators(0).unwrap();
        assert_eq!(down0.nnz(), 0);
        for k in 0..4 {
            let (up, down) = dec.hodge_operators(k).unwrap();
            assert!(up.mul(&down).max_abs() < 1e-9 * (1.0 + up.max_abs() * down.max_abs()));
            assert!(down.mul(&up).max_abs() < 1e-9 * (1.0 + up.max_abs() * down.max_abs()));
            let (su, sd) = dec.symmetric_operators(k).unwrap();
            assert!(su.asymmetry() < 1e-9 * (1.0 + su.max_abs()));
            assert!(sd.asymmetry() < 1e-9 * (1.0 + sd.max_abs()));
            let g = dec.laplacian(k, 1.0, 2.0).unwrap().to_csr();
            assert!(g.add_scaled(&su.add_scaled(&sd, 2.0), -1.0).max_abs() < 1e-9 * (1.0 + g.max_abs()));
        }
    }
}
