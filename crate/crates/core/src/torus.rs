//! Flat-torus oracle: per Fourier mode, forms and tractor forms are finite
//! dimensional and `d`, `δ` and the flat tractor connection are exact
//! Gaussian-rational matrices. The tractor side is assembled from the
//! connection on the basis `X, Z_1..Z_n, Y`, not from slot formulas.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{Half, Rational};
use crate::error::{Error, Result};
use crate::factory::{build_g, build_l_definition};
use crate::form::{FormContext, FormExpr, Letter, OperatorPoly};

pub type GaussRat = Complex<Rational>;

fn c_re(r: Rational) -> GaussRat {
    Complex::new(r, Rational::zero())
}

fn c_im(r: Rational) -> GaussRat {
    Complex::new(Rational::zero(), r)
}

/// Dense matrix over the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussRat>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![GaussRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = GaussRat::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussRat {
        &self.data[i * self.cols + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut GaussRat {
        &mut self.data[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.im.is_zero())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        *out.get_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes");
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Largest `|re| + |im|` of `self − other`; zero exactly when equal.
    pub fn max_discrepancy(&self, other: &CMatrix) -> Rational {
        use num_traits::Signed;
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = a - b;
                d.re.abs() + d.im.abs()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Sorted `k`-subsets of `0..m`, as bit masks, in lexicographic order.
fn subsets(m: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn rec(start: usize, m: usize, k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..m {
            rec(i + 1, m, k - 1, acc | (1 << i), out);
        }
    }
    rec(0, m, k, 0, &mut out);
    out
}

/// `e_i ∧ b_S = sign · b_{S ∪ {i}}`, or `None` if `i ∈ S`.
fn wedge_front(i: usize, s: u64) -> Option<(i64, u64)> {
    if s & (1 << i) != 0 {
        return None;
    }
    let below = (s & ((1u64 << i) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1 } else { -1 }, s | (1 << i)))
}

/// `ι(e_i) b_S = sign · b_{S ∖ {i}}`, or `None` if `i ∉ S`.
fn contract(i: usize, s: u64) -> Option<(i64, u64)> {
    if s & (1 << i) == 0 {
        return None;
    }
    let below = (s & ((1u64 << i) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1 } else { -1 }, s & !(1 << i)))
}

/// A mode matrix from `k_in`-forms to `k_out`-forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeOperator {
    pub n: u32,
    pub k_in: u32,
    pub k_out: u32,
    pub xi: Vec<i64>,
    pub matrix: CMatrix,
}

fn index_of(basis: &[u64]) -> std::collections::HashMap<u64, usize> {
    basis.iter().enumerate().map(|(i, s)| (*s, i)).collect()
}

/// `i ε(ξ)` on `k`-forms; empty matrix if `k ≥ n`.
fn d_matrix(n: usize, k: usize, xi: &[i64]) -> CMatrix {
    let src = subsets(n, k);
    let dst = subsets(n, k + 1);
    let idx = index_of(&dst);
    let mut m = CMatrix::zeros(dst.len(), src.len());
    for (j, s) in src.iter().enumerate() {
        for (p, &x) in xi.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if let Some((sign, t)) = wedge_front(p, *s) {
                *m.get_mut(idx[&t], j) += c_im(Rational::from_integer((sign * x).into()));
            }
        }
    }
    m
}

/// `−i ι(ξ)` on `k`-forms.
fn delta_matrix(n: usize, k: usize, xi: &[i64]) -> CMatrix {
    if k == 0 {
        return CMatrix::zeros(0, subsets(n, 0).len());
    }
    let src = subsets(n, k);
    let dst = subsets(n, k - 1);
    let idx = index_of(&dst);
    let mut m = CMatrix::zeros(dst.len(), src.len());
    for (j, s) in src.iter().enumerate() {
        for (p, &x) in xi.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if let Some((sign, t)) = contract(p, *s) {
                *m.get_mut(idx[&t], j) += c_im(Rational::from_integer((-sign * x).into()));
            }
        }
    }
    m
}

/// `(d, δ)` on `k`-forms at the mode `ξ`.
pub fn mode_matrices(n: u32, k: u32, xi: &[i64]) -> Result<(ModeOperator, ModeOperator)> {
    if xi.len() != n as usize || k > n {
        return Err(Error::InvalidParameters(format!("mode of length {} for n = {n}, k = {k}", xi.len())));
    }
    let (nu, ku) = (n as usize, k as usize);
    let d = ModeOperator { n, k_in: k, k_out: k + 1, xi: xi.to_vec(), matrix: d_matrix(nu, ku, xi) };
    let delta = ModeOperator { n, k_in: k, k_out: k.saturating_sub(1), xi: xi.to_vec(), matrix: delta_matrix(nu, ku, xi) };
    Ok((d, delta))
}

/// Word or operator evaluated at `J = 0` with `d`, `δ` replaced by mode
/// matrices.
fn word_matrix(n: usize, k_start: usize, letters: &[Letter], xi: &[i64]) -> CMatrix {
    let mut deg = k_start;
    let mut m = CMatrix::identity(subsets(n, k_start).len());
    for l in letters.iter().rev() {
        let step = match l {
            Letter::D => {
                let s = d_matrix(n, deg, xi);
                deg += 1;
                s
            }
            Letter::Delta => {
                let s = delta_matrix(n, deg, xi);
                deg -= 1;
                s
            }
        };
        m = step.mul(&m);
    }
    m
}

pub fn expr_mode_matrix(e: &FormExpr, xi: &[i64]) -> Result<CMatrix> {
    let ctx = e.context();
    let (n, k) = (ctx.n as usize, ctx.k as usize);
    let out_dim = if e.degree() < 0 || e.degree() > n as i64 { 0 } else { subsets(n, e.degree() as usize).len() };
    let mut acc = CMatrix::zeros(out_dim, subsets(n, k).len());
    for (w, c) in e.terms() {
        let c0 = c.eval(&Rational::zero())?;
        if c0.is_zero() {
            continue;
        }
        acc = acc.add(&word_matrix(n, k, w.letters(), xi).scale(&c_re(c0)));
    }
    Ok(acc)
}

pub fn operator_mode_matrix(op: &OperatorPoly, xi: &[i64]) -> Result<CMatrix> {
    let ctx = op.context();
    let fc = FormContext::new(ctx.n, ctx.k, Half::ZERO)?;
    expr_mode_matrix(&FormExpr::generator(fc).apply_operator(op)?, xi)
}

/// Tractor `k`-forms at a mode: basis `b_S`, `S ⊂ {X, Z_1..Z_n, Y}` with
/// `X = 0`, `Z_a = a`, `Y = n + 1`.
struct TractorModeSpace {
    n: usize,
    basis: Vec<u64>,
    index: std::collections::HashMap<u64, usize>,
}

impl TractorModeSpace {
    fn new(n: usize, k: usize) -> Self {
        let basis = subsets(n + 2, k);
        let index = index_of(&basis);
        Self { n, basis, index }
    }

    fn x(&self) -> usize {
        0
    }

    fn y(&self) -> usize {
        self.n + 1
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `∂_p + A_p` with `∂_p = iξ_p`, `A_p e_X = e_p`, `A_p e_a = −δ_pa e_Y`,
    /// `A_p e_Y = 0`, extended to wedges as a derivation.
    fn covariant(&self, p: usize, xi_p: i64) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::identity(dim).scale(&c_im(Rational::from_integer(xi_p.into())));
        let zp = p + 1;
        for (j, &s) in self.basis.iter().enumerate() {
            // replace e_X by e_{Z_p}
            for (from, to, coef) in [(self.x(), zp, 1i64), (zp, self.y(), -1i64)] {
                if let Some((s1, rest)) = contract(from, s) {
                    if let Some((s2, t)) = wedge_front(to, rest) {
                        *m.get_mut(self.index[&t], j) += c_re(Rational::from_integer((coef * s1 * s2).into()));
                    }
                }
            }
        }
        m
    }

    /// `□ = −Σ_p (∂_p + A_p)²` (flat, `J = 0`).
    fn box_matrix(&self, xi: &[i64]) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for (p, &x) in xi.iter().enumerate() {
            let c = self.covariant(p, x);
            acc = acc.add(&c.mul(&c));
        }
        acc.scale(&c_re(-Rational::one()))
    }

    /// `e_X ∧ b_T` and the like, for `T ⊂ {1..n}` given as a form-index mask.
    fn lift(&self, front: &[usize], form_mask: u64) -> (i64, usize) {
        let mut s = form_mask << 1;
        let mut sign = 1;
        for &i in front.iter().rev() {
            let (sg, t) = wedge_front(i, s).expect("distinct indices");
            sign *= sg;
            s = t;
        }
        (sign, self.index[&s])
    }
}

/// Result of the flat pipeline for one mode.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// `Z`-slot read-out: the mode matrix of `L`.
    pub l: CMatrix,
    /// `X`-slot read-out divided by `k`: the mode matrix of `G`.
    pub g: CMatrix,
    /// `Y`- and `W`-components of `Box^ℓ M`, all zero when the slots vanish.
    pub y_block: CMatrix,
    pub w_block: CMatrix,
}

/// `Box^ℓ M` on the flat torus at mode `ξ`, with slot read-outs.
pub fn pipeline_numeric(n: u32, k: u32, ell: u32, xi: &[i64]) -> Result<PipelineOutput> {
    let ctx = FormContext::for_order(n, k, ell)?;
    if xi.len() != n as usize {
        return Err(Error::InvalidParameters(format!("mode of length {} for n = {n}", xi.len())));
    }
    let (nu, ku) = (n as usize, k as usize);
    let space = TractorModeSpace::new(nu, ku);
    let forms_k = subsets(nu, ku);
    let forms_km1 = subsets(nu, ku - 1);
    let forms_km2 = if ku >= 2 { subsets(nu, ku - 2) } else { Vec::new() };
    let kq = Rational::from_integer((k as i64).into());
    let zc = (ctx.w.to_rational() + Rational::from_integer((n as i64 - 2 * k as i64).into())) / &kq;
    let delta = delta_matrix(nu, ku, xi);

    // M as a map from k-forms to tractor k-forms
    let mut m = CMatrix::zeros(space.dim(), forms_k.len());
    for (j, s) in forms_k.iter().enumerate() {
        let (sign, row) = space.lift(&[], *s);
        *m.get_mut(row, j) += c_re(&zc * Rational::from_integer(sign.into()));
        for (i, t) in forms_km1.iter().enumerate() {
            let v = delta.get(i, j);
            if v.is_zero() {
                continue;
            }
            let (sign, row) = space.lift(&[space.x()], *t);
            *m.get_mut(row, j) += v * c_re(Rational::from_integer(sign.into()) / &kq);
        }
    }

    let bx = space.box_matrix(xi);
    let mut t = m;
    for _ in 0..ell {
        t = bx.mul(&t);
    }

    let read = |front: &[usize], forms: &[u64], scale: Rational| -> CMatrix {
        let mut out = CMatrix::zeros(forms.len(), t.cols());
        for (i, s) in forms.iter().enumerate() {
            let (sign, row) = space.lift(front, *s);
            for j in 0..t.cols() {
                *out.get_mut(i, j) = t.get(row, j) * c_re(Rational::from_integer(sign.into()) * &scale);
            }
        }
        out
    };
    // coefficient of e_X ∧ e_ȧ is ρ/k, so it is G itself
    let l = read(&[], &forms_k, Rational::one());
    let g = read(&[space.x()], &forms_km1, Rational::one());
    let y_block = read(&[space.y()], &forms_km1, Rational::one());
    let w_block = if ku >= 2 { read(&[space.x(), space.y()], &forms_km2, Rational::one()) } else { CMatrix::zeros(0, t.cols()) };
    Ok(PipelineOutput { l, g, y_block, w_block })
}

/// Mode matrix of `L` from the flat pipeline; errors if it is not real.
pub fn pipeline_l_numeric(n: u32, k: u32, ell: u32, xi: &[i64]) -> Result<CMatrix> {
    let out = pipeline_numeric(n, k, ell, xi)?;
    if !out.l.is_real() {
        return Err(Error::Internal(format!("imaginary residue in L for ξ = {xi:?}")));
    }
    Ok(out.l)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub xi: Vec<i64>,
    /// Largest entrywise discrepancy against the symbolic `L` at `J = 0`.
    #[serde(with = "crate::coeff::rational_str")]
    pub l_discrepancy: Rational,
    #[serde(with = "crate::coeff::rational_str")]
    pub g_discrepancy: Rational,
    pub slots_vanish: bool,
    pub real: bool,
}

impl ModeComparison {
    pub fn exact(&self) -> bool {
        self.l_discrepancy.is_zero() && self.g_discrepancy.is_zero() && self.slots_vanish && self.real
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusReport {
    pub n: u32,
    pub k: u32,
    pub ell: u32,
    pub seed: u64,
    pub modes: Vec<ModeComparison>,
}

impl TorusReport {
    pub fn passed(&self) -> bool {
        self.modes.iter().all(ModeComparison::exact)
    }
}

/// `count` modes with entries in `[-range, range]` from a fixed seed.
pub fn random_modes(n: u32, count: usize, range: i64, seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-range..=range)).collect()).collect()
}

/// Symbolic `L` and `G` at `J = 0` against the flat pipeline, mode by mode.
pub fn compare_modes(n: u32, k: u32, ell: u32, modes: &[Vec<i64>], seed: u64) -> Result<TorusReport> {
    let l = build_l_definition(n, k, ell)?;
    let g = build_g(n, k, ell)?;
    let results: Result<Vec<ModeComparison>> = modes
        .par_iter()
        .map(|xi| {
            let out = pipeline_numeric(n, k, ell, xi)?;
            let ls = operator_mode_matrix(&l, xi)?;
            let gs = expr_mode_matrix(&g, xi)?;
            Ok(ModeComparison {
                xi: xi.clone(),
                l_discrepancy: out.l.max_discrepancy(&ls),
                g_discrepancy: out.g.max_discrepancy(&gs),
                slots_vanish: out.y_block.is_zero() && out.w_block.is_zero(),
                real: out.l.is_real(),
            })
        })
        .collect();
    Ok(TorusReport { n, k, ell, seed, modes: results? })
}

/// [`compare_modes`] on `count` seeded random modes with entries in `[-3, 3]`.
pub fn compare_random(n: u32, k: u32, ell: u32, count: usize, seed: u64) -> Result<TorusReport> {
    compare_modes(n, k, ell, &random_modes(n, count, 3, seed), seed)
}
