//! The free alternating word algebra in `d` and `δ` over one generator form,
//! and the commutative ring `R = Q(J)[E, F] / (EF = FE = 0)` with `E = dδ`,
//! `F = δd`, where every degree-preserving operator lands after expansion.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::coeff::{Half, RatJ, Rational};
use crate::error::{Error, Result};

/// Dimension, generator degree and generator weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormContext {
    pub n: u32,
    pub k: u32,
    pub w: Half,
}

impl FormContext {
    /// Checks `n >= 3` and `1 <= k <= n/2`.
    pub fn new(n: u32, k: u32, w: Half) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameters(format!("dimension n = {n} must be at least 3")));
        }
        if k < 1 || 2 * k > n {
            return Err(Error::InvalidParameters(format!("form degree k = {k} must satisfy 1 <= k <= n/2 = {n}/2")));
        }
        Ok(Self { n, k, w })
    }

    /// The context of `L_k^ℓ`: weight `w = k + ℓ - n/2`.
    pub fn for_order(n: u32, k: u32, ell: u32) -> Result<Self> {
        if ell < 1 {
            return Err(Error::InvalidParameters("order ℓ must be at least 1".into()));
        }
        let w = Half::from_twice(2 * (k as i64 + ell as i64) - n as i64);
        Self::new(n, k, w)
    }

    pub fn op_context(&self) -> OpContext {
        OpContext { n: self.n, k: self.k }
    }

    pub fn with_weight(&self, w: Half) -> Self {
        Self { w, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    D,
    Delta,
}

impl Letter {
    fn degree_shift(self) -> i64 {
        match self {
            Letter::D => 1,
            Letter::Delta => -1,
        }
    }
}

/// Alternating word in `d`, `δ`; letters are stored outermost first, so the
/// word `dδ` means "apply `δ`, then `d`".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FormWord(Vec<Letter>);

impl FormWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Parses a string over `{d, δ}` (`D`/`delta` are accepted as spellings);
    /// returns `None` if the word contains `dd` or `δδ`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut letters = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix("delta").or_else(|| rest.strip_prefix('δ')) {
                letters.push(Letter::Delta);
                rest = r;
            } else {
                let r = rest.strip_prefix('d')?;
                letters.push(Letter::D);
                rest = r;
            }
        }
        let w = Self(letters);
        w.is_alternating().then_some(w)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_alternating(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1])
    }

    pub fn degree_shift(&self) -> i64 {
        self.0.iter().map(|l| l.degree_shift()).sum()
    }

    /// Weight change in half units: every `δ` lowers the weight by 2.
    pub fn weight_shift(&self) -> Half {
        let deltas = self.0.iter().filter(|l| **l == Letter::Delta).count() as i64;
        Half::from_int(-2 * deltas)
    }

    /// `letter ∘ self`, or `None` when this repeats the outermost letter.
    pub fn prefixed(&self, letter: Letter) -> Option<FormWord> {
        if self.0.first() == Some(&letter) {
            return None;
        }
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Some(FormWord(v))
    }

    /// For even-length words: `(dδ)^p -> E^p`, `(δd)^q -> F^q`.
    fn as_monomial(&self) -> Option<Monomial> {
        if self.0.is_empty() {
            return Some(Monomial::One);
        }
        if !self.0.len().is_multiple_of(2) {
            return None;
        }
        let p = (self.0.len() / 2) as u32;
        Some(match self.0[0] {
            Letter::D => Monomial::E(p),
            Letter::Delta => Monomial::F(p),
        })
    }
}

impl fmt::Display for FormWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::D => "d",
                Letter::Delta => "δ",
            })?;
        }
        Ok(())
    }
}

/// Linear combination of alternating words applied to the generator `f`.
/// All terms land in the same form degree `degree`; a degree outside `[0, n]`
/// forces the expression to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormExpr {
    ctx: FormContext,
    degree: i64,
    terms: BTreeMap<FormWord, RatJ>,
}

impl FormExpr {
    /// The generator `f` itself.
    pub fn generator(ctx: FormContext) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(FormWord::empty(), RatJ::one());
        Self { ctx, degree: ctx.k as i64, terms }
    }

    pub fn zero(ctx: FormContext, degree: i64) -> Self {
        Self { ctx, degree, terms: BTreeMap::new() }
    }

    /// Builds an expression from explicit terms; every word must be
    /// alternating and all words must share one output degree.
    pub fn from_terms(ctx: FormContext, terms: impl IntoIterator<Item = (FormWord, RatJ)>) -> Result<Self> {
        let mut degree = None;
        let mut out = BTreeMap::new();
        for (word, c) in terms {
            if !word.is_alternating() {
                return Err(Error::InvalidParameters(format!("word `{word}` is not alternating")));
            }
            let deg = ctx.k as i64 + word.degree_shift();
            match degree {
                None => degree = Some(deg),
                Some(d) if d != deg => {
                    return Err(Error::InvalidParameters(format!(
                        "inhomogeneous form expression: degrees {d} and {deg}"
                    )))
                }
                _ => {}
            }
            add_term(&mut out, word, c);
        }
        let mut e = Self { ctx, degree: degree.unwrap_or(ctx.k as i64), terms: out };
        e.clamp_degree();
        Ok(e)
    }

    fn clamp_degree(&mut self) {
        if self.degree < 0 || self.degree > self.ctx.n as i64 {
            self.terms.clear();
        }
    }

    pub fn context(&self) -> FormContext {
        self.ctx
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FormWord, &RatJ)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &FormWord) -> RatJ {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Applies `d` or `δ` to every term.
    pub fn apply_letter(&self, letter: Letter) -> FormExpr {
        let degree = self.degree + letter.degree_shift();
        let mut out = FormExpr { ctx: self.ctx, degree, terms: BTreeMap::new() };
        if degree < 0 || degree > self.ctx.n as i64 {
            return out;
        }
        for (w, c) in &self.terms {
            if let Some(w2) = w.prefixed(letter) {
                add_term(&mut out.terms, w2, c.clone());
            }
        }
        out
    }

    pub fn d(&self) -> FormExpr {
        self.apply_letter(Letter::D)
    }

    pub fn delta(&self) -> FormExpr {
        self.apply_letter(Letter::Delta)
    }

    /// `dδ` applied to this expression.
    pub fn e(&self) -> FormExpr {
        self.delta().d()
    }

    /// `δd` applied to this expression.
    pub fn f(&self) -> FormExpr {
        self.d().delta()
    }

    pub fn scale(&self, c: &RatJ) -> FormExpr {
        if c.is_zero() {
            return FormExpr::zero(self.ctx, self.degree);
        }
        FormExpr {
            ctx: self.ctx,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect(),
        }
    }

    pub fn scale_rational(&self, c: &Rational) -> FormExpr {
        self.scale(&RatJ::constant(c.clone()))
    }

    pub fn add(&self, other: &FormExpr) -> Result<FormExpr> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            add_term(&mut terms, w.clone(), c.clone());
        }
        Ok(FormExpr { ctx: self.ctx, degree: self.degree, terms })
    }

    pub fn sub(&self, other: &FormExpr) -> Result<FormExpr> {
        self.add(&other.scale(&RatJ::from_int(-1)))
    }

    fn check_compatible(&self, other: &FormExpr) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch(format!("{:?} vs {:?}", self.ctx, other.ctx)));
        }
        if self.degree != other.degree && !(self.is_zero() && other.is_zero()) {
            return Err(Error::Internal(format!(
                "adding form expressions of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// Common weight of all terms, counting `J` as weight −2 and each `δ`
    /// as −2. `Ok(None)` for the zero expression; an error if terms
    /// disagree or a coefficient is not a single power of `J`.
    pub fn raw_weight(&self) -> Result<Option<Half>> {
        let mut common = None;
        for (w, c) in &self.terms {
            let (_, pj) = c
                .as_monomial()
                .ok_or_else(|| Error::Internal(format!("coefficient {c} of `{w}` is not a power of J")))?;
            let wt = self.ctx.w + w.weight_shift() + Half::from_int(-2 * pj);
            match common {
                None => common = Some(wt),
                Some(x) if x != wt => {
                    return Err(Error::Internal(format!("inhomogeneous weights {x} and {wt} in {self}")))
                }
                _ => {}
            }
        }
        Ok(common)
    }

    /// Applies an expanded operator of `R` (acting on forms of this
    /// expression's degree) to the expression.
    pub fn apply_operator(&self, op: &OperatorPoly) -> Result<FormExpr> {
        if op.ctx.n != self.ctx.n || op.ctx.k as i64 != self.degree {
            return Err(Error::ContextMismatch(format!(
                "operator on {}-forms (n = {}) applied to a degree-{} expression (n = {})",
                op.ctx.k, op.ctx.n, self.degree, self.ctx.n
            )));
        }
        let mut acc = self.scale(&op.constant);
        let mut e_pow = self.clone();
        for c in &op.e {
            e_pow = e_pow.e();
            acc = acc.add(&e_pow.scale(c))?;
        }
        let mut f_pow = self.clone();
        for c in &op.f {
            f_pow = f_pow.f();
            acc = acc.add(&f_pow.scale(c))?;
        }
        Ok(acc)
    }

    /// Reads a degree-preserving expression as an element of `R`.
    pub fn to_operator_poly(&self) -> Result<OperatorPoly> {
        if self.degree != self.ctx.k as i64 {
            return Err(Error::NotEndomorphism(format!(
                "expression lands in degree {} but the generator has degree {}",
                self.degree, self.ctx.k
            )));
        }
        let mut op = OperatorPoly::zero(self.ctx.op_context());
        for (w, c) in &self.terms {
            let m = w
                .as_monomial()
                .ok_or_else(|| Error::NotEndomorphism(format!("word `{w}` does not preserve degree")))?;
            op = op.add(&OperatorPoly::monomial(self.ctx.op_context(), m, c.clone()))?;
        }
        Ok(op)
    }
}

fn add_term(terms: &mut BTreeMap<FormWord, RatJ>, w: FormWord, c: RatJ) {
    if c.is_zero() {
        return;
    }
    match terms.entry(w) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

pub fn apply_letter(e: &FormExpr, letter: Letter) -> FormExpr {
    e.apply_letter(letter)
}

pub fn to_operator_poly(e: &FormExpr) -> Result<OperatorPoly> {
    e.to_operator_poly()
}

impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let word = if w.is_empty() { "f".to_string() } else { format!("{w}f") };
            if c.is_one() {
                write!(f, "{word}")?;
            } else {
                write!(f, "[{c}]{word}")?;
            }
        }
        Ok(())
    }
}

/// Dimension and form degree; the ring `R` does not depend on the weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpContext {
    pub n: u32,
    pub k: u32,
}

/// A basis monomial of `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    One,
    E(u32),
    F(u32),
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monomial::One => write!(f, "1"),
            Monomial::E(1) => write!(f, "E"),
            Monomial::F(1) => write!(f, "F"),
            Monomial::E(p) => write!(f, "E^{p}"),
            Monomial::F(p) => write!(f, "F^{p}"),
        }
    }
}

/// Canonical element `c + Σ e_p E^p + Σ f_q F^q` of `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorPoly {
    ctx: OpContext,
    constant: RatJ,
    /// `e[p-1]` is the coefficient of `E^p`.
    e: Vec<RatJ>,
    /// `f[q-1]` is the coefficient of `F^q`.
    f: Vec<RatJ>,
}

/// Outcome of testing `a = c·b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Proportionality {
    /// `a` is zero.
    Zero,
    Scalar(RatJ),
    NotProportional,
}

impl OperatorPoly {
    pub fn zero(ctx: OpContext) -> Self {
        Self { ctx, constant: RatJ::zero(), e: Vec::new(), f: Vec::new() }
    }

    pub fn constant(ctx: OpContext, c: RatJ) -> Self {
        Self { constant: c, ..Self::zero(ctx) }
    }

    pub fn one(ctx: OpContext) -> Self {
        Self::constant(ctx, RatJ::one())
    }

    pub fn monomial(ctx: OpContext, m: Monomial, c: RatJ) -> Self {
        let mut op = Self::zero(ctx);
        op.set(m, c);
        op
    }

    /// `a E + b F + c`.
    pub fn linear(ctx: OpContext, a: RatJ, b: RatJ, c: RatJ) -> Self {
        let mut op = Self::constant(ctx, c);
        op.set(Monomial::E(1), a);
        op.set(Monomial::F(1), b);
        op
    }

    pub fn context(&self) -> OpContext {
        self.ctx
    }

    pub fn coefficient(&self, m: Monomial) -> RatJ {
        match m {
            Monomial::One => self.constant.clone(),
            Monomial::E(0) | Monomial::F(0) => self.constant.clone(),
            Monomial::E(p) => self.e.get(p as usize - 1).cloned().unwrap_or_default(),
            Monomial::F(q) => self.f.get(q as usize - 1).cloned().unwrap_or_default(),
        }
    }

    fn set(&mut self, m: Monomial, c: RatJ) {
        let slot = |v: &mut Vec<RatJ>, p: u32| {
            let i = p as usize - 1;
            if v.len() <= i {
                v.resize(i + 1, RatJ::zero());
            }
            v[i] = c.clone();
        };
        match m {
            Monomial::One | Monomial::E(0) | Monomial::F(0) => self.constant = c.clone(),
            Monomial::E(p) => slot(&mut self.e, p),
            Monomial::F(q) => slot(&mut self.f, q),
        }
        self.trim();
    }

    fn trim(&mut self) {
        while self.e.last().is_some_and(RatJ::is_zero) {
            self.e.pop();
        }
        while self.f.last().is_some_and(RatJ::is_zero) {
            self.f.pop();
        }
    }

    /// Nonzero terms in display order: `E^1.., F^1.., 1`.
    pub fn terms(&self) -> Vec<(Monomial, RatJ)> {
        let mut out = Vec::new();
        for (i, c) in self.e.iter().enumerate() {
            if !c.is_zero() {
                out.push((Monomial::E(i as u32 + 1), c.clone()));
            }
        }
        for (i, c) in self.f.iter().enumerate() {
            if !c.is_zero() {
                out.push((Monomial::F(i as u32 + 1), c.clone()));
            }
        }
        if !self.constant.is_zero() {
            out.push((Monomial::One, self.constant.clone()));
        }
        out
    }

    /// Every monomial that is nonzero in `self` or `other`.
    pub fn support_union(&self, other: &OperatorPoly) -> Vec<Monomial> {
        let mut ms: Vec<Monomial> = self.terms().into_iter().chain(other.terms()).map(|(m, _)| m).collect();
        ms.sort();
        ms.dedup();
        ms
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.e.is_empty() && self.f.is_empty()
    }

    pub fn e_degree(&self) -> usize {
        self.e.len()
    }

    pub fn f_degree(&self) -> usize {
        self.f.len()
    }

    /// Total degree in `E` and `F` (largest power present).
    pub fn degree(&self) -> usize {
        self.e.len().max(self.f.len())
    }

    fn check_ctx(&self, other: &OperatorPoly) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch(format!("{:?} vs {:?}", self.ctx, other.ctx)));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        self.check_ctx(other)?;
        let zip = |a: &[RatJ], b: &[RatJ]| -> Vec<RatJ> {
            (0..a.len().max(b.len()))
                .map(|i| match (a.get(i), b.get(i)) {
                    (Some(x), Some(y)) => x + y,
                    (Some(x), None) | (None, Some(x)) => x.clone(),
                    (None, None) => unreachable!(),
                })
                .collect()
        };
        let mut out = OperatorPoly {
            ctx: self.ctx,
            constant: &self.constant + &other.constant,
            e: zip(&self.e, &other.e),
            f: zip(&self.f, &other.f),
        };
        out.trim();
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        self.add(&other.scale(&RatJ::from_int(-1)))
    }

    pub fn scale(&self, c: &RatJ) -> OperatorPoly {
        let mut out = OperatorPoly {
            ctx: self.ctx,
            constant: &self.constant * c,
            e: self.e.iter().map(|x| x * c).collect(),
            f: self.f.iter().map(|x| x * c).collect(),
        };
        out.trim();
        out
    }

    /// Ring product; `E^p F^q` cross terms vanish.
    pub fn mul(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        self.check_ctx(other)?;
        let conv = |a: &[RatJ], b: &[RatJ], ca: &RatJ, cb: &RatJ| -> Vec<RatJ> {
            let len = (a.len() + b.len()).max(a.len()).max(b.len());
            let mut out = vec![RatJ::zero(); len];
            for (i, x) in a.iter().enumerate() {
                out[i] = &out[i] + &(x * cb);
            }
            for (j, y) in b.iter().enumerate() {
                out[j] = &out[j] + &(ca * y);
            }
            for (i, x) in a.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b.iter().enumerate() {
                    // E^{i+1} E^{j+1} = E^{i+j+2}
                    out[i + j + 1] = &out[i + j + 1] + &(x * y);
                }
            }
            out
        };
        let mut out = OperatorPoly {
            ctx: self.ctx,
            constant: &self.constant * &other.constant,
            e: conv(&self.e, &other.e, &self.constant, &other.constant),
            f: conv(&self.f, &other.f, &self.constant, &other.constant),
        };
        out.trim();
        Ok(out)
    }

    /// Product of a nonempty list of factors.
    pub fn product<'a>(ctx: OpContext, factors: impl IntoIterator<Item = &'a OperatorPoly>) -> Result<OperatorPoly> {
        factors.into_iter().try_fold(OperatorPoly::one(ctx), |acc, f| acc.mul(f))
    }

    /// Finds `c` with `self = c·b`.
    pub fn proportionality(&self, b: &OperatorPoly) -> Result<Proportionality> {
        self.check_ctx(b)?;
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Proportionality::Zero);
        }
        let (m, bc) = b.terms().into_iter().next().expect("nonzero");
        let c = self.coefficient(m).checked_div(&bc)?;
        if c.is_zero() {
            return Ok(Proportionality::NotProportional);
        }
        if b.scale(&c) == *self {
            Ok(Proportionality::Scalar(c))
        } else {
            Ok(Proportionality::NotProportional)
        }
    }

    /// First monomial where `self` and `other` differ, with both coefficients.
    pub fn first_difference(&self, other: &OperatorPoly) -> Option<(Monomial, RatJ, RatJ)> {
        self.support_union(other).into_iter().find_map(|m| {
            let (a, b) = (self.coefficient(m), other.coefficient(m));
            (a != b).then_some((m, a, b))
        })
    }

    /// Scalar value on a joint eigenvector with `E = e`, `F = f`, `J = j`.
    pub fn eval_scalar(&self, e: &Rational, f: &Rational, j: &Rational) -> Result<Rational> {
        let mut acc = self.constant.eval(j)?;
        let mut pe = Rational::one();
        for c in &self.e {
            pe *= e;
            acc += c.eval(j)? * &pe;
        }
        let mut pf = Rational::one();
        for c in &self.f {
            pf *= f;
            acc += c.eval(j)? * &pf;
        }
        Ok(acc)
    }

    /// Plain-text rendering, e.g. `E + 3F + (3/2)J`.
    pub fn to_text(&self) -> String {
        render(self, false)
    }

    /// LaTeX rendering, e.g. `2 d\delta + 6 \delta d + 3J`.
    pub fn to_latex(&self) -> String {
        render(self, true)
    }
}

pub fn poly_mul(a: &OperatorPoly, b: &OperatorPoly) -> Result<OperatorPoly> {
    a.mul(b)
}

pub fn proportionality(a: &OperatorPoly, b: &OperatorPoly) -> Result<Proportionality> {
    a.proportionality(b)
}

impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn rational_body(r: &Rational, latex: bool) -> String {
    if r.is_integer() {
        r.to_string()
    } else if latex {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    } else {
        format!("({r})")
    }
}

/// Splits a coefficient into a sign and a body; an empty body means `1`.
fn coefficient_body(c: &RatJ, latex: bool) -> (bool, String) {
    if let Some((r, p)) = c.as_monomial() {
        let neg = r.is_negative();
        let r = r.abs();
        let j = match p {
            0 => String::new(),
            1 => "J".to_string(),
            p if latex => format!("J^{{{p}}}"),
            p => format!("J^{p}"),
        };
        let body = if p < 0 {
            if latex {
                format!("\\frac{{{}}}{{{}J^{{{}}}}}", r.numer(), r.denom(), -p)
            } else {
                format!("({r}/J^{})", -p)
            }
        } else if r.is_one() {
            j
        } else {
            format!("{}{}", rational_body(&r, latex), j)
        };
        (neg, body)
    } else if latex {
        (false, format!("\\left[{}\\right]", c))
    } else {
        (false, format!("[{c}]"))
    }
}

fn render(op: &OperatorPoly, latex: bool) -> String {
    let terms = op.terms();
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in terms.iter().enumerate() {
        let (neg, body) = coefficient_body(c, latex);
        let mono = match (m, latex) {
            (Monomial::One, _) => String::new(),
            (Monomial::E(1), false) => "E".into(),
            (Monomial::F(1), false) => "F".into(),
            (Monomial::E(p), false) => format!("E^{p}"),
            (Monomial::F(p), false) => format!("F^{p}"),
            (Monomial::E(1), true) => "d\\delta".into(),
            (Monomial::F(1), true) => "\\delta d".into(),
            (Monomial::E(p), true) => format!("(d\\delta)^{{{p}}}"),
            (Monomial::F(p), true) => format!("(\\delta d)^{{{p}}}"),
        };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let sep = if !mono.is_empty() && ((latex && !body.is_empty()) || body.contains('J')) { " " } else { "" };
        match (body.is_empty(), mono.is_empty()) {
            (true, true) => out.push('1'),
            (true, false) => out.push_str(&mono),
            (false, _) => {
                out.push_str(&body);
                out.push_str(sep);
                out.push_str(&mono);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat};

    fn ctx(n: u32, k: u32, w2: i64) -> FormContext {
        FormContext::new(n, k, Half::from_twice(w2)).unwrap()
    }

    fn oc(n: u32, k: u32) -> OpContext {
        OpContext { n, k }
    }

    fn c(v: i64) -> RatJ {
        RatJ::from_int(v)
    }

    fn rj(s: &str) -> RatJ {
        s.parse().unwrap()
    }

    #[test]
    fn context_validation() {
        assert!(FormContext::new(2, 1, Half::ZERO).is_err());
        assert!(FormContext::new(3, 2, Half::ZERO).is_err());
        assert!(FormContext::new(4, 0, Half::ZERO).is_err());
        let c = FormContext::for_order(5, 2, 1).unwrap();
        assert_eq!(c.w, Half::from_twice(1));
    }

    #[test]
    fn degenerate_letters_give_zero() {
        // d at top degree: use a 1-form generator in n = 3 pushed to degree 3
        let c3 = ctx(3, 1, 0);
        let top = FormExpr::generator(c3).d().delta().d().d();
        assert!(top.is_zero());
        let f = FormExpr::generator(c3);
        let dd = f.d().d();
        assert!(dd.is_zero());
        assert!(f.delta().delta().is_zero());
        // δ on a 0-form
        assert!(f.delta().delta().is_zero());
        let zero_form = f.delta();
        assert_eq!(zero_form.degree(), 0);
        assert!(zero_form.delta().is_zero());
        assert!(!zero_form.d().is_zero());
    }

    #[test]
    fn delta_bookkeeping() {
        let c6 = ctx(6, 2, 2);
        let e = FormExpr::generator(c6).delta();
        assert_eq!(e.degree(), 1);
        assert_eq!(e.raw_weight().unwrap(), Some(Half::from_int(-1)));
        let (w, _) = e.terms().next().unwrap();
        assert_eq!(w.to_string(), "δ");
        // J lowers weight by two as well
        let ej = e.d().add(&FormExpr::generator(c6).scale(&RatJ::j())).unwrap();
        assert_eq!(ej.raw_weight().unwrap(), Some(Half::from_int(-1)));
        let bad = e.d().add(&FormExpr::generator(c6)).unwrap();
        assert!(bad.raw_weight().is_err());
    }

    #[test]
    fn words_to_ring() {
        let c6 = ctx(6, 2, 0);
        let e = FormExpr::from_terms(c6, [(FormWord::parse("dδ").unwrap(), c(3))]).unwrap();
        assert_eq!(e.to_operator_poly().unwrap(), OperatorPoly::monomial(oc(6, 2), Monomial::E(1), c(3)));
        let e2 = FormExpr::from_terms(c6, [(FormWord::parse("dδdδ").unwrap(), c(1))]).unwrap();
        assert_eq!(e2.to_operator_poly().unwrap(), OperatorPoly::monomial(oc(6, 2), Monomial::E(2), c(1)));
        assert!(FormWord::parse("ddδ").is_none());
        // mixed output degrees are rejected at construction
        let mixed = FormExpr::from_terms(c6, [(FormWord::empty(), c(1)), (FormWord::parse("δ").unwrap(), c(1))]);
        assert!(mixed.is_err());
        // a degree k-1 expression is not an endomorphism
        let lower = FormExpr::generator(c6).delta();
        assert!(matches!(lower.to_operator_poly(), Err(Error::NotEndomorphism(_))));
    }

    #[test]
    fn ring_products() {
        let o = oc(4, 1);
        let e = OperatorPoly::linear(o, c(1), c(0), c(0));
        let f = OperatorPoly::linear(o, c(0), c(1), c(0));
        let one = OperatorPoly::one(o);
        let lhs = e.add(&one).unwrap().mul(&f.add(&one).unwrap()).unwrap();
        assert_eq!(lhs, OperatorPoly::linear(o, c(1), c(1), c(1)));
        let sq = e.sub(&f).unwrap().mul(&e.add(&f).unwrap()).unwrap();
        let expect = OperatorPoly::monomial(o, Monomial::E(2), c(1))
            .sub(&OperatorPoly::monomial(o, Monomial::F(2), c(1)))
            .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn bezout_pair_for_the_middle_dimension_multiplies_to_one() {
        // (−4/J²·(E+F) + 2/J)·(E+F+J/2) + (4/J²·(E−F))·(E−F) = 1
        let o = oc(4, 2);
        let m4 = rj("(-4)/(J^2)");
        let phi_t = OperatorPoly::linear(o, m4.clone(), m4, rj("(2)/(J)"));
        let s = OperatorPoly::linear(o, c(1), c(1), rj("1/2*J"));
        let p4 = rj("(4)/(J^2)");
        let phi_u = OperatorPoly::linear(o, p4.clone(), -p4, RatJ::zero());
        let t = OperatorPoly::linear(o, c(1), c(-1), RatJ::zero());
        let total = phi_t.mul(&s).unwrap().add(&phi_u.mul(&t).unwrap()).unwrap();
        assert_eq!(total, OperatorPoly::one(o));
    }

    #[test]
    fn cross_monomials_vanish() {
        let o = oc(8, 3);
        for p in 1..5 {
            for q in 1..5 {
                let a = OperatorPoly::monomial(o, Monomial::E(p), c(1));
                let b = OperatorPoly::monomial(o, Monomial::F(q), c(1));
                assert!(a.mul(&b).unwrap().is_zero());
                assert!(b.mul(&a).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn proportionality_cases() {
        let o = oc(8, 2);
        let a = OperatorPoly::linear(o, c(2), c(6), rj("3*J"));
        let b = OperatorPoly::linear(o, c(1), c(3), rj("3/2*J"));
        assert_eq!(a.proportionality(&b).unwrap(), Proportionality::Scalar(c(2)));
        let e = OperatorPoly::linear(o, c(1), c(0), c(0));
        let f = OperatorPoly::linear(o, c(0), c(1), c(0));
        assert_eq!(e.proportionality(&f).unwrap(), Proportionality::NotProportional);
        assert_eq!(OperatorPoly::zero(o).proportionality(&e).unwrap(), Proportionality::Zero);
        assert!(e.proportionality(&OperatorPoly::zero(o)).is_err());
        assert!(e.mul(&OperatorPoly::zero(oc(6, 2))).is_err());
    }

    #[test]
    fn rendering() {
        let o = oc(8, 2);
        let b = OperatorPoly::linear(o, c(1), c(3), rj("3/2*J"));
        assert_eq!(b.to_text(), "E + 3F + (3/2)J");
        let a = OperatorPoly::linear(o, c(2), c(6), rj("3*J"));
        assert_eq!(a.to_latex(), "2 d\\delta + 6 \\delta d + 3J");
        let n = OperatorPoly::linear(o, c(-2), c(-6), rj("-3*J"));
        assert_eq!(n.to_text(), "-2E - 6F - 3J");
        assert_eq!(OperatorPoly::zero(o).to_text(), "0");
        let sq = OperatorPoly::monomial(o, Monomial::E(2), RatJ::constant(rat(1, 2)));
        assert_eq!(sq.to_text(), "(1/2)E^2");
        assert_eq!(sq.to_latex(), "\\frac{1}{2} (d\\delta)^{2}");
    }

    #[test]
    fn scalar_evaluation() {
        let o = oc(4, 2);
        let op = OperatorPoly::linear(o, c(2), c(2), rj("-2*J"));
        assert_eq!(op.eval_scalar(&int(0), &int(1), &int(1)).unwrap(), int(0));
        let sq = OperatorPoly::monomial(o, Monomial::E(2), c(1));
        assert_eq!(sq.eval_scalar(&int(3), &int(0), &int(1)).unwrap(), int(9));
    }
}
