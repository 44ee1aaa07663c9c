//! Exact scalars: arbitrary-precision rationals, polynomials in the formal
//! Schouten trace `J`, and the fraction field `Q(J)` of those polynomials.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Builds `num/den` as a [`Rational`].
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `v` as a [`Rational`].
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p"` or `"p/q"` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Dense univariate polynomial in `J` over the rationals. Index = power of `J`.
/// The zero polynomial is the empty coefficient list; otherwise the leading
/// coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyJ {
    coeffs: Vec<Rational>,
}

impl PolyJ {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * J^power`
    pub fn monomial(c: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Constant polynomial value, if the polynomial has degree <= 0.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    /// `(c, p)` when the polynomial is the single term `c J^p`, `c != 0`.
    pub fn as_monomial(&self) -> Option<(Rational, usize)> {
        let deg = self.degree()?;
        if self.coeffs[..deg].iter().all(Zero::is_zero) {
            Some((self.coeffs[deg].clone(), deg))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        // Horner
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Euclidean division, `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &PolyJ) -> Result<(PolyJ, PolyJ)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead = divisor.leading().expect("nonzero divisor").clone();
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if sd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); sd - dd + 1];
        for i in (0..=sd - dd).rev() {
            let c = &rem[i + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &PolyJ) -> PolyJ {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> PolyJ {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let inv = l.recip();
                self.scale(&inv)
            }
        }
    }

    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match p {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if p == 1 {
                        write!(f, "J")?;
                    } else {
                        write!(f, "J^{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for PolyJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_inner(f)
    }
}

impl Add for &PolyJ {
    type Output = PolyJ;
    fn add(self, rhs: &PolyJ) -> PolyJ {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                match rhs.coeffs.get(i) {
                    Some(b) => a + b,
                    None => a,
                }
            })
            .collect();
        PolyJ::from_coeffs(coeffs)
    }
}

impl Neg for &PolyJ {
    type Output = PolyJ;
    fn neg(self) -> PolyJ {
        PolyJ { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub for &PolyJ {
    type Output = PolyJ;
    fn sub(self, rhs: &PolyJ) -> PolyJ {
        self + &(-rhs)
    }
}

impl Mul for &PolyJ {
    type Output = PolyJ;
    fn mul(self, rhs: &PolyJ) -> PolyJ {
        if self.is_zero() || rhs.is_zero() {
            return PolyJ::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        PolyJ::from_coeffs(coeffs)
    }
}

/// Element of `Q(J)`: `num / den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatJ {
    num: PolyJ,
    den: PolyJ,
}

impl Default for RatJ {
    fn default() -> Self {
        Self::zero()
    }
}

impl RatJ {
    pub fn zero() -> Self {
        Self { num: PolyJ::zero(), den: PolyJ::one() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The formal variable `J`.
    pub fn j() -> Self {
        Self::from_poly(PolyJ::monomial(Rational::one(), 1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(PolyJ::constant(c))
    }

    pub fn from_int(v: i64) -> Self {
        Self::constant(int(v))
    }

    /// `c J^p`.
    pub fn monomial(c: Rational, p: usize) -> Self {
        Self::from_poly(PolyJ::monomial(c, p))
    }

    pub fn from_poly(num: PolyJ) -> Self {
        Self { num, den: PolyJ::one() }
    }

    /// Normalizes `num / den`.
    pub fn new(num: PolyJ, den: PolyJ) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        // constant denominators are the overwhelmingly common case
        if let Some(c) = den.as_constant() {
            return Ok(Self { num: num.scale(&c.recip()), den: PolyJ::one() });
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g)?;
        let (den, _) = den.div_rem(&g)?;
        let lead = den.leading().expect("nonzero").recip();
        Ok(Self { num: num.scale(&lead), den: den.scale(&lead) })
    }

    pub fn num(&self) -> &PolyJ {
        &self.num
    }

    pub fn den(&self) -> &PolyJ {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.as_constant().is_some_and(|c| c.is_one()) && self.den.degree() == Some(0)
    }

    /// The value as a plain rational, when it does not depend on `J`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.den.degree() == Some(0) {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// `(c, p)` with `self = c J^p` for integer `p`, or `None` if `self` is
    /// not a single power of `J` (zero is not a monomial).
    pub fn as_monomial(&self) -> Option<(Rational, i64)> {
        let (c, pn) = self.num.as_monomial()?;
        let (d, pd) = self.den.as_monomial()?;
        Some((c / d, pn as i64 - pd as i64))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &RatJ) -> Result<RatJ> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: u32) -> RatJ {
        (0..e).fold(RatJ::one(), |acc, _| &acc * self)
    }

    /// Substitutes `J = j0`.
    pub fn eval(&self, j0: &Rational) -> Result<Rational> {
        let d = self.den.eval(j0);
        if d.is_zero() {
            return Err(Error::Pole(j0.to_string()));
        }
        Ok(self.num.eval(j0) / d)
    }
}

impl From<Rational> for RatJ {
    fn from(c: Rational) -> Self {
        RatJ::constant(c)
    }
}

impl From<i64> for RatJ {
    fn from(v: i64) -> Self {
        RatJ::from_int(v)
    }
}

impl Add for &RatJ {
    type Output = RatJ;
    fn add(self, rhs: &RatJ) -> RatJ {
        if self.den == rhs.den {
            return RatJ::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero den");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatJ::new(num, &self.den * &rhs.den).expect("nonzero den")
    }
}

impl Sub for &RatJ {
    type Output = RatJ;
    fn sub(self, rhs: &RatJ) -> RatJ {
        self + &(-rhs)
    }
}

impl Neg for &RatJ {
    type Output = RatJ;
    fn neg(self) -> RatJ {
        RatJ { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatJ {
    type Output = RatJ;
    fn mul(self, rhs: &RatJ) -> RatJ {
        if self.is_zero() || rhs.is_zero() {
            return RatJ::zero();
        }
        RatJ::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero den")
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, rhs: &$t) -> $t { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(RatJ, Add add, Sub sub, Mul mul);
forward_owned!(PolyJ, Add add, Sub sub, Mul mul);

impl Neg for RatJ {
    type Output = RatJ;
    fn neg(self) -> RatJ {
        -&self
    }
}

/// The binary operations of the coefficient field, for callers that pick one
/// at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn ratj_arith(a: &RatJ, b: &RatJ, op: ArithOp) -> Result<RatJ> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

pub fn ratj_eval(a: &RatJ, j0: &Rational) -> Result<Rational> {
    a.eval(j0)
}

impl fmt::Display for RatJ {
    /// `p(J)` when the denominator is 1, otherwise `(p(J))/(q(J))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl FromStr for PolyJ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let src = s.trim();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let bad = |what: &str| Error::Parse(format!("{what} in polynomial `{src}`"));
        // split into signed terms; a leading sign is allowed
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for ch in src.chars() {
            match ch {
                '+' | '-' if !cur.trim().is_empty() => {
                    terms.push((neg, std::mem::take(&mut cur)));
                    neg = ch == '-';
                }
                '+' => {}
                '-' => neg = !neg,
                c if c.is_whitespace() => {}
                c => cur.push(c),
            }
        }
        if cur.trim().is_empty() {
            return Err(bad("dangling sign"));
        }
        terms.push((neg, cur));

        let mut acc = PolyJ::zero();
        for (neg, t) in terms {
            let (coef, power) = match t.find('J') {
                None => (parse_rational(&t)?, 0usize),
                Some(pos) => {
                    let head = t[..pos].trim_end_matches('*');
                    let coef = if head.is_empty() { Rational::one() } else { parse_rational(head)? };
                    let tail = &t[pos + 1..];
                    let power = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^')
                            .ok_or_else(|| bad("junk after J"))?
                            .parse::<usize>()
                            .map_err(|_| bad("bad exponent"))?
                    };
                    (coef, power)
                }
            };
            let coef = if neg { -coef } else { coef };
            acc = &acc + &PolyJ::monomial(coef, power);
        }
        Ok(acc)
    }
}

impl FromStr for RatJ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        // "(p)/(q)" form
        if let Some(rest) = s.strip_prefix('(') {
            if let Some(close) = matching_paren(rest) {
                let num = &rest[..close];
                let after = rest[close + 1..].trim();
                if let Some(den) = after.strip_prefix('/') {
                    let den = den.trim();
                    let den = den
                        .strip_prefix('(')
                        .and_then(|d| d.strip_suffix(')'))
                        .ok_or_else(|| Error::Parse(format!("denominator must be parenthesized in `{s}`")))?;
                    return RatJ::new(num.parse()?, den.parse()?);
                }
                if after.is_empty() {
                    return Ok(RatJ::from_poly(num.parse()?));
                }
            }
        }
        Ok(RatJ::from_poly(s.parse()?))
    }
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' if depth == 0 => return Some(i),
            ')' => depth -= 1,
            _ => {}
        }
    }
    None
}

impl Serialize for RatJ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RatJ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde helpers for [`Rational`] as a `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A half-integer, stored as twice its value. Conformal weights live here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Half(i64);

impl Half {
    pub const ZERO: Half = Half(0);

    pub fn from_int(v: i64) -> Self {
        Half(2 * v)
    }

    pub fn from_twice(v: i64) -> Self {
        Half(v)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.is_even()
    }

    pub fn to_rational(self) -> Rational {
        rat(self.0, 2)
    }

    pub fn shift(self, by: i64) -> Self {
        Half(self.0 + 2 * by)
    }

    /// The integer value, if there is one.
    pub fn as_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn cmp_int(self, v: i64) -> Ordering {
        self.0.cmp(&(2 * v))
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Half {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let r = parse_rational(s.trim())?;
        let twice = r * int(2);
        if !twice.is_integer() {
            return Err(Error::Parse(format!("`{s}` is not a half-integer")));
        }
        let v = twice
            .to_integer()
            .to_string()
            .parse::<i64>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Half(v))
    }
}

impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rj(s: &str) -> RatJ {
        s.parse().unwrap()
    }

    #[test]
    fn cancellation() {
        let j = RatJ::j();
        let q = j.checked_div(&j).unwrap();
        assert!((&q * &RatJ::one()).is_one());

        let num: PolyJ = "2*J^2 + 2*J".parse().unwrap();
        let den: PolyJ = "2*J".parse().unwrap();
        assert_eq!(RatJ::new(num, den).unwrap(), rj("J + 1"));

        assert_eq!(&RatJ::constant(rat(1, 2)) + &RatJ::constant(rat(1, 3)), RatJ::constant(rat(5, 6)));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(ratj_arith(&RatJ::j(), &RatJ::zero(), ArithOp::Div), Err(Error::DivisionByZero)));
        assert!(RatJ::new(PolyJ::one(), PolyJ::zero()).is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(rj("J + 1").eval(&int(2)).unwrap(), int(3));
        assert_eq!(rj("(4)/(J^2)").eval(&rat(1, 2)).unwrap(), int(16));
        assert!(matches!(rj("(1)/(J)").eval(&int(0)), Err(Error::Pole(_))));
    }

    #[test]
    fn denominators_are_monic_and_reduced() {
        let a = RatJ::new("3*J^2 - 3".parse().unwrap(), "6*J - 6".parse().unwrap()).unwrap();
        assert_eq!(a, rj("1/2*J + 1/2"));
        let b = RatJ::new("J".parse().unwrap(), "2*J^2 + 4*J".parse().unwrap()).unwrap();
        assert_eq!(b.den().leading(), Some(&Rational::one()));
        assert_eq!(b.to_string(), "(1/2)/(J + 2)");
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-3/7", "J", "-J^3 + 1/2*J - 5", "(2*J + 1)/(J^2 - 1/3)", "(-4)/(J^2)"] {
            let v = rj(s);
            assert_eq!(v.to_string().parse::<RatJ>().unwrap(), v, "{s}");
        }
        assert!("J^".parse::<RatJ>().is_err());
        assert!("3/0".parse::<RatJ>().is_err());
    }

    #[test]
    fn monomial_view() {
        assert_eq!(rj("(-4)/(J^2)").as_monomial(), Some((int(-4), -2)));
        assert_eq!(rj("3/2*J").as_monomial(), Some((rat(3, 2), 1)));
        assert_eq!(rj("J + 1").as_monomial(), None);
    }

    #[test]
    fn half_integers() {
        let w = Half::from_twice(-3);
        assert_eq!(w.to_string(), "-3/2");
        assert_eq!(w.shift(2).to_string(), "1/2");
        assert_eq!(w.to_rational(), rat(-3, 2));
        assert!(Half::from_int(4).as_int() == Some(4));
    }
}
