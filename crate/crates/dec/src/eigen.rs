//! Lowest eigenpairs of sparse symmetric positive semidefinite matrices.
//!
//! Small problems go through a dense symmetric eigensolver. Larger ones use
//! a block Krylov space of the shifted inverse, applied with Jacobi
//! preconditioned conjugate gradients, followed by Rayleigh-Ritz.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sparse::{axpy, dot, norm, GramSum};
use crate::{DecError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenConfig {
    /// Matrices up to this size are solved densely.
    pub dense_limit: usize,
    pub shift: f64,
    /// Residual required of every returned pair, relative to `max(|λ|, 1)`.
    pub tol: f64,
    pub krylov_blocks: usize,
    pub guard: usize,
    pub max_restarts: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            dense_limit: 1600,
            shift: 1.0,
            tol: 1e-6,
            krylov_blocks: 8,
            guard: 8,
            max_restarts: 12,
            cg_tol: 1e-7,
            cg_max_iter: 20_000,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub method: &'static str,
    pub iterations: usize,
}

pub fn lowest_eigenpairs(a: &GramSum, count: usize, cfg: &EigenConfig) -> Result<EigenPairs> {
    let n = a.dim();
    if count > n {
        return Err(DecError::InvalidParameters(format!("asked for {count} eigenvalues of a {n}x{n} matrix")));
    }
    if count == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: Vec::new(), method: "none", iterations: 0 });
    }
    if n <= cfg.dense_limit || count + cfg.guard >= n / 4 {
        return Ok(dense_lowest(a, count));
    }
    krylov_lowest(a, count, cfg, None)
}

/// Restriction to an invariant subspace, applied in place.
pub type Projector<'a> = &'a (dyn Fn(&mut [f64]) + Sync);

pub fn dense_lowest(a: &GramSum, count: usize) -> EigenPairs {
    let m = a.to_csr().to_dense();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let order = &order[..count];
    EigenPairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
        method: "dense",
        iterations: 1,
    }
}

/// Solves `(a + shift) x = b`.
pub fn pcg(a: &GramSum, shift: f64, diag: &[f64], b: &[f64], cfg: &EigenConfig) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(x);
    }
    let precond = |r: &[f64]| r.iter().zip(diag).map(|(ri, di)| ri / (di + shift)).collect::<Vec<_>>();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..cfg.cg_max_iter {
        a.matvec(&p, &mut ap);
        axpy(shift, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm(&r) <= cfg.cg_tol * bn {
            return Ok(x);
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(DecError::NoConvergence(format!(
        "conjugate gradients stalled after {} iterations, residual {:.3e}",
        cfg.cg_max_iter,
        norm(&r) / bn
    )))
}

/// Orthogonalizes `v` against `basis` twice; returns `None` if it collapses.
fn orthonormalize(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n0 = norm(&v);
    if n0 == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            axpy(-c, q, &mut v);
        }
    }
    let n1 = norm(&v);
    if n1 < 1e-10 * n0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n1);
    Some(v)
}

/// Block Krylov iteration on `(a + shift)⁻¹`. With a projector every
/// vector is kept inside its range, which must be invariant under `a`.
pub fn krylov_lowest(a: &GramSum, count: usize, cfg: &EigenConfig, project: Option<Projector>) -> Result<EigenPairs> {
    if count == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: Vec::new(), method: "none", iterations: 0 });
    }
    let n = a.dim();
    let b = count + cfg.guard;
    let diag = a.diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut start: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut worst = f64::INFINITY;
    for restart in 0..=cfg.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut block: Vec<Vec<f64>> = Vec::new();
        for mut v in start.drain(..) {
            if let Some(p) = project {
                p(&mut v);
            }
            if let Some(q) = orthonormalize(&basis, v) {
                basis.push(q.clone());
                block.push(q);
            }
        }
        for _ in 1..cfg.krylov_blocks {
            let next: Vec<Vec<f64>> = block
                .par_iter()
                .map(|v| pcg(a, cfg.shift, &diag, v, cfg))
                .collect::<Result<_>>()?;
            block.clear();
            for mut v in next {
                if let Some(p) = project {
                    p(&mut v);
                }
                if let Some(q) = orthonormalize(&basis, v) {
                    basis.push(q.clone());
                    block.push(q);
                }
            }
        }
        let m = basis.len();
        let aq: Vec<Vec<f64>> = basis.par_iter().map(|q| a.apply(q)).collect();
        let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &aq[j]) + dot(&basis[j], &aq[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let ritz = |col: usize, src: &[Vec<f64>]| {
            let mut v = vec![0.0; n];
            for (i, s) in src.iter().enumerate() {
                axpy(eig.eigenvectors[(i, col)], s, &mut v);
            }
            v
        };
        let mut values = Vec::with_capacity(b);
        let mut vectors = Vec::with_capacity(b);
        worst = 0.0;
        for (pos, &col) in order.iter().take(b.max(count)).enumerate() {
            let v = ritz(col, &basis);
            let av = ritz(col, &aq);
            let theta = eig.eigenvalues[col];
            if pos < count {
                let mut r = av.clone();
                axpy(-theta, &v, &mut r);
                worst = worst.max(norm(&r) / theta.abs().max(1.0));
            }
            values.push(theta);
            vectors.push(v);
        }
        if worst <= cfg.tol {
            values.truncate(count);
            vectors.truncate(count);
            return Ok(EigenPairs { values, vectors, method: "block-krylov", iterations: restart + 1 });
        }
        start = vectors;
    }
    Err(DecError::NoConvergence(format!(
        "block Krylov solver: relative residual {worst:.3e} after {} restarts (tolerance {:.1e})",
        cfg.max_restarts, cfg.tol
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Csr;

    fn path_laplacian(n: usize) -> GramSum {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, -1.0));
            t.push((i, (i + 1) % n, 1.0));
        }
        GramSum::new(n, vec![(1.0, Csr::from_triplets(n, n, t))])
    }

    #[test]
    fn cycle_graph_spectrum() {
        let n = 400;
        let a = path_laplacian(n);
        let exact = |j: usize| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos();
        let cfg = EigenConfig { dense_limit: 10, ..EigenConfig::default() };
        let p = lowest_eigenpairs(&a, 5, &cfg).unwrap();
        assert_eq!(p.method, "block-krylov");
        let want = [exact(0), exact(1), exact(1), exact(2), exact(2)];
        for (g, w) in p.values.iter().zip(want) {
            assert!((g - w).abs() < 1e-8, "{g} vs {w}");
        }
        let d = lowest_eigenpairs(&a, 5, &EigenConfig::default()).unwrap();
        assert_eq!(d.method, "dense");
        for (g, w) in d.values.iter().zip(want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn too_many_eigenvalues() {
        assert!(lowest_eigenpairs(&path_laplacian(5), 6, &EigenConfig::default()).is_err());
    }
}
