//! Minimal compressed-row matrices, enough for assembling DEC operators.

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Duplicate entries are summed and exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < nrows && c < ncols, "triplet out of range");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Csr { nrows, ncols, indptr, indices, data };
        m.prune(0.0);
        m
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let n = d.len();
        Csr {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: d.to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Drops entries with `|v| <= eps`.
    pub fn prune(&mut self, eps: f64) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.data[p].abs() > eps {
                    indices.push(self.indices[p]);
                    data.push(self.data[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |p| (self.indices[p], self.data[p]))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for p in self.indptr[r]..self.indptr[r + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            *yr = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        Csr::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn mul(&self, other: &Csr) -> Self {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in product");
        let mut acc = vec![0.0f64; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut cols: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if acc[c] != 0.0 {
                    indices.push(c);
                    data.push(acc[c]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Csr { nrows: self.nrows, ncols: other.ncols, indptr, indices, data }
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Self {
        let mut m = self.clone();
        for (r, l) in left.iter().enumerate().take(m.nrows) {
            for p in m.indptr[r]..m.indptr[r + 1] {
                m.data[p] *= l * right[m.indices[p]];
            }
        }
        m
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Csr, alpha: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            t.extend(self.row(r).map(|(c, v)| (r, c, v)));
            t.extend(other.row(r).map(|(c, v)| (r, c, alpha * v)));
        }
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|r| self.row(r).find(|&(c, _)| c == r).map(|(_, v)| v).unwrap_or(0.0))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.add_scaled(&t, -1.0).max_abs()
    }
}

/// `Σ αᵢ BᵢᵀBᵢ`, applied without forming the products.
#[derive(Clone, Debug)]
pub struct GramSum {
    dim: usize,
    terms: Vec<(f64, Csr, Csr)>,
}

impl GramSum {
    pub fn new(dim: usize, terms: Vec<(f64, Csr)>) -> Self {
        let terms = terms
            .into_iter()
            .map(|(a, b)| {
                assert_eq!(b.ncols, dim, "factor has wrong width");
                let t = b.transpose();
                (a, b, t)
            })
            .collect();
        GramSum { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight, factor `B` and `Bᵀ` of term `i`.
    pub fn term(&self, i: usize) -> (f64, &Csr, &Csr) {
        let (a, b, t) = &self.terms[i];
        (*a, b, t)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = Vec::new();
        let mut out = vec![0.0; self.dim];
        for (alpha, b, bt) in &self.terms {
            tmp.resize(b.nrows, 0.0);
            b.matvec(x, &mut tmp);
            bt.matvec(&tmp, &mut out);
            axpy(*alpha, &out, y);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (alpha, b, _) in &self.terms {
            for r in 0..b.nrows {
                for (c, v) in b.row(r) {
                    d[c] += alpha * v * v;
                }
            }
        }
        d
    }

    pub fn to_csr(&self) -> Csr {
        let mut acc = Csr::from_triplets(self.dim, self.dim, Vec::new());
        for (alpha, b, bt) in &self.terms {
            acc = acc.add_scaled(&bt.mul(b), *alpha);
        }
        acc
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
