//! Integer incidence matrices and exact Betti numbers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mesh::SimplicialMesh;
use crate::sparse::Csr;
use crate::{DecError, Result};

/// Prime used for rank computations. The presets are torsion-free, so
/// ranks mod a large prime agree with rational ranks.
pub const RANK_PRIME: u64 = 2_147_483_647;

/// Coboundary `d_k : C^k -> C^{k+1}` as signed integer rows. Row `i`
/// lists the faces of the `i`-th `(k+1)`-simplex with sign `(-1)^j` for the
/// face omitting vertex `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incidence {
    pub k: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, i8)>>,
}

impl Incidence {
    pub fn to_csr(&self) -> Csr {
        let t = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v as f64)))
            .collect();
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    /// Integer product `next * self`; returns the number of nonzero entries.
    pub fn compose_nonzeros(&self, next: &Incidence) -> usize {
        assert_eq!(next.ncols, self.nrows);
        let mut count = 0;
        for row in &next.rows {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(mid, a) in row {
                for &(c, b) in &self.rows[mid] {
                    *acc.entry(c).or_insert(0) += a as i64 * b as i64;
                }
            }
            count += acc.values().filter(|&&v| v != 0).count();
        }
        count
    }
}

pub fn coboundaries(mesh: &SimplicialMesh) -> Vec<Incidence> {
    (0..3)
        .map(|k| {
            let idx = mesh.index(k);
            let rows = mesh.simplices[k + 1]
                .iter()
                .map(|s| {
                    (0..s.len())
                        .map(|j| {
                            let mut f = s.clone();
                            f.remove(j);
                            (idx[&f], if j % 2 == 0 { 1 } else { -1 })
                        })
                        .collect()
                })
                .collect();
            Incidence { k, nrows: mesh.simplices[k + 1].len(), ncols: mesh.simplices[k].len(), rows }
        })
        .collect()
}

/// Checks `d_{k+1} d_k = 0` exactly.
pub fn check_chain_complex(d: &[Incidence]) -> Result<()> {
    for w in d.windows(2) {
        let nz = w[0].compose_nonzeros(&w[1]);
        if nz != 0 {
            return Err(DecError::Degenerate(format!("d_{} d_{} has {nz} nonzero entries", w[1].k, w[0].k)));
        }
    }
    Ok(())
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p as i128) as u64
}

/// Rank over `Z/p` by column reduction on the lowest nonzero row.
pub fn rank_mod_p(d: &Incidence, p: u64) -> usize {
    // columns of the boundary matrix are the rows of the coboundary
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    let mut rank = 0;
    for row in &d.rows {
        let mut col: Vec<(usize, u64)> = row
            .iter()
            .map(|&(c, v)| (c, if v >= 0 { v as u64 } else { p - (-v) as u64 }))
            .collect();
        col.sort_unstable_by_key(|e| e.0);
        while let Some(&(low, val)) = col.last() {
            match pivots.get(&low) {
                Some(piv) => {
                    let f = val * inv_mod(piv.last().unwrap().1, p) % p;
                    col = sub_scaled(&col, piv, f, p);
                }
                None => {
                    pivots.insert(low, col);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn sub_scaled(a: &[(usize, u64)], b: &[(usize, u64)], f: u64, p: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, (p - b[j].1 * f % p) % p));
            j += 1;
        } else {
            let v = (a[i].1 + p - b[j].1 * f % p) % p;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn ranks(d: &[Incidence]) -> [usize; 3] {
    [rank_mod_p(&d[0], RANK_PRIME), rank_mod_p(&d[1], RANK_PRIME), rank_mod_p(&d[2], RANK_PRIME)]
}

pub fn betti_from_ranks(f: [usize; 4], r: [usize; 3]) -> [usize; 4] {
    [f[0] - r[0], f[1] - r[0] - r[1], f[2] - r[1] - r[2], f[3] - r[2]]
}

/// Betti numbers `b_0..b_3` from exact ranks of the coboundaries.
pub fn betti_numbers(mesh: &SimplicialMesh, d: &[Incidence]) -> [usize; 4] {
    betti_from_ranks(mesh.f_vector(), ranks(d))
}
