//! Weighted tractor `k`-forms in an Einstein scale, stored by their four
//! composition-series slots, and the operators `M`, `□_σ`, `M*` on them.
//!
//! Slot layout for valence `k` and tractor weight `w̃`:
//!
//! | slot | form degree | weight     |
//! |------|-------------|------------|
//! | `Y`  | `k - 1`     | `w̃ + k`    |
//! | `Z`  | `k`         | `w̃ + k`    |
//! | `W`  | `k - 2`     | `w̃ + k - 2`|
//! | `X`  | `k - 1`     | `w̃ + k - 2`|
//!
//! The scale `σ` is numerically 1. Each `σ` factor still raises the weight by
//! one, so a tractor carries the power of `σ` it has picked up and the
//! weight of a slot's raw content is its nominal weight minus that power.

use std::fmt;

use crate::coeff::{rat, Half, RatJ, Rational};
use crate::error::{Error, Result};
use crate::form::{FormContext, FormExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TractorForm {
    ctx: FormContext,
    valence: u32,
    wt: Half,
    sigma: i64,
    y: FormExpr,
    z: FormExpr,
    w: FormExpr,
    x: FormExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Y,
    Z,
    W,
    X,
}

impl Slot {
    fn degree_offset(self) -> i64 {
        match self {
            Slot::Y | Slot::X => -1,
            Slot::Z => 0,
            Slot::W => -2,
        }
    }

    fn weight_offset(self) -> i64 {
        match self {
            Slot::Y | Slot::Z => 0,
            Slot::W | Slot::X => -2,
        }
    }
}

fn ratj(r: Rational) -> RatJ {
    RatJ::constant(r)
}

fn jr(r: Rational) -> RatJ {
    RatJ::constant(r) * RatJ::j()
}

/// `(E + F + a J)` applied to `e`.
fn hodge_shift(e: &FormExpr, a: &Rational) -> Result<FormExpr> {
    e.e().add(&e.f())?.add(&e.scale(&jr(a.clone())))
}

impl TractorForm {
    /// Assembles a tractor from explicit slots and checks the degree and
    /// weight invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_slots(
        ctx: FormContext,
        valence: u32,
        wt: Half,
        sigma: i64,
        y: FormExpr,
        z: FormExpr,
        w: FormExpr,
        x: FormExpr,
    ) -> Result<Self> {
        let t = Self { ctx, valence, wt, sigma, y, z, w, x };
        t.check()?;
        Ok(t)
    }

    pub fn zero(ctx: FormContext, valence: u32, wt: Half, sigma: i64) -> Self {
        let k = valence as i64;
        Self {
            ctx,
            valence,
            wt,
            sigma,
            y: FormExpr::zero(ctx, k - 1),
            z: FormExpr::zero(ctx, k),
            w: FormExpr::zero(ctx, k - 2),
            x: FormExpr::zero(ctx, k - 1),
        }
    }

    /// `M f` for the generator `f` of `ctx`: tractor weight `w - k`,
    /// `Z`-slot `((n + w - 2k)/k) f`, `X`-slot `δf`.
    pub fn make_m(ctx: FormContext) -> Self {
        let k = ctx.k;
        let f = FormExpr::generator(ctx);
        let coef = (ctx.w.to_rational() + Rational::from_integer((ctx.n as i64 - 2 * k as i64).into()))
            / Rational::from_integer((k as i64).into());
        let mut t = Self::zero(ctx, k, ctx.w.shift(-(k as i64)), 0);
        t.z = f.scale_rational(&coef);
        t.x = f.delta();
        t
    }

    pub fn context(&self) -> FormContext {
        self.ctx
    }

    pub fn valence(&self) -> u32 {
        self.valence
    }

    pub fn weight(&self) -> Half {
        self.wt
    }

    pub fn sigma_power(&self) -> i64 {
        self.sigma
    }

    pub fn slot(&self, s: Slot) -> &FormExpr {
        match s {
            Slot::Y => &self.y,
            Slot::Z => &self.z,
            Slot::W => &self.w,
            Slot::X => &self.x,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.y.is_zero() && self.z.is_zero() && self.w.is_zero() && self.x.is_zero()
    }

    /// Degree and raw-weight invariants of all four slots.
    pub fn check(&self) -> Result<()> {
        let k = self.valence as i64;
        for s in [Slot::Y, Slot::Z, Slot::W, Slot::X] {
            let e = self.slot(s);
            if e.context() != self.ctx {
                return Err(Error::ContextMismatch(format!("slot {s:?} has context {:?}", e.context())));
            }
            if e.is_zero() {
                continue;
            }
            if e.degree() != k + s.degree_offset() {
                return Err(Error::Internal(format!("slot {s:?} has degree {} for valence {k}", e.degree())));
            }
            let expect = self.wt.shift(k + s.weight_offset() - self.sigma);
            match e.raw_weight()? {
                Some(got) if got != expect => {
                    return Err(Error::Internal(format!("slot {s:?} has weight {got}, expected {expect}")))
                }
                _ => {}
            }
        }
        if k == 1 && !self.w.is_zero() {
            return Err(Error::Internal("W slot of a tractor 1-form must vanish".into()));
        }
        Ok(())
    }

    fn scale(&self, c: &RatJ) -> Self {
        Self {
            y: self.y.scale(c),
            z: self.z.scale(c),
            w: self.w.scale(c),
            x: self.x.scale(c),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &TractorForm) -> Result<Self> {
        if self.valence != other.valence || self.wt != other.wt || self.sigma != other.sigma {
            return Err(Error::ContextMismatch("adding tractors of different type".into()));
        }
        Ok(Self {
            y: self.y.add(&other.y)?,
            z: self.z.add(&other.z)?,
            w: self.w.add(&other.w)?,
            x: self.x.add(&other.x)?,
            ..self.clone()
        })
    }

    /// `□_σ = σ(−Δ̃ − 2(w̃/n)(n + w̃ − 1)J)` in the Einstein scale.
    pub fn apply_box(&self) -> Result<Self> {
        let n = self.ctx.n as i64;
        let k = self.valence as i64;
        let nr = Rational::from_integer(n.into());
        let (tau, mu, nu, rho) = (&self.y, &self.z, &self.w, &self.x);

        // J-coefficients on the Hodge Laplacian of each slot
        let a_yx = Rational::from_integer(1.into()) - rat(2 * (k - 1) * (n - k + 1), n);
        let a_z = -rat(2 * k * (n - k - 1), n);

        let mut y = hodge_shift(tau, &a_yx)?
            .add(&mu.delta().scale(&RatJ::from_int(-2 * k)))?
            .add(&rho.scale(&RatJ::from_int(n - 2 * k + 2)))?;
        let z = tau
            .d()
            .scale(&jr(-rat(2, n * k)))
            .add(&hodge_shift(mu, &a_z)?)?
            .add(&rho.d().scale(&ratj(-rat(2, k))))?;
        let mut w = FormExpr::zero(self.ctx, k - 2);
        let mut x = tau
            .scale(&(jr(rat(n - 2 * k + 2, n * n)) * RatJ::j()))
            .add(&mu.delta().scale(&jr(-rat(2 * k, n))))?
            .add(&hodge_shift(rho, &a_yx)?)?;
        if k >= 2 {
            let a_w = -rat(2 * (k - 3) * (n - k + 2), n);
            y = y.add(&nu.d().scale(&ratj(rat(2, k - 1))))?;
            w = tau
                .delta()
                .scale(&jr(rat(2 * (k - 1), n)))
                .add(&hodge_shift(nu, &a_w)?)?
                .add(&rho.delta().scale(&RatJ::from_int(-2 * (k - 1))))?;
            x = x.add(&nu.d().scale(&jr(-rat(2, n * (k - 1)))))?;
        }

        let wt = self.wt.to_rational();
        let diag = jr(-Rational::from_integer(2.into()) * &wt / &nr * (&nr + &wt - Rational::from_integer(1.into())));
        let out = Self {
            ctx: self.ctx,
            valence: self.valence,
            wt: self.wt.shift(-1),
            sigma: self.sigma + 1,
            y: y.add(&self.y.scale(&diag))?,
            z: z.add(&self.z.scale(&diag))?,
            w: w.add(&self.w.scale(&diag))?,
            x: x.add(&self.x.scale(&diag))?,
        };
        if cfg!(debug_assertions) {
            out.check()?;
        }
        Ok(out)
    }

    pub fn apply_box_times(&self, times: u32) -> Result<Self> {
        (0..times).try_fold(self.clone(), |t, _| t.apply_box())
    }

    /// `M* F = −(w̃ + k) Z-part + (1/k) d(Y-part)`.
    pub fn apply_mstar(&self) -> Result<FormExpr> {
        let k = self.valence as i64;
        let c = -(self.wt.to_rational() + Rational::from_integer(k.into()));
        self.z.scale_rational(&c).add(&self.y.d().scale_rational(&rat(1, k)))
    }

    /// `(Z-part, X-part / k)`.
    pub fn extract_slots(&self) -> (FormExpr, FormExpr) {
        let k = self.valence as i64;
        (self.z.clone(), self.x.scale_rational(&rat(1, k)))
    }

    pub fn linear_combination(a: &RatJ, s: &TractorForm, b: &RatJ, t: &TractorForm) -> Result<TractorForm> {
        s.scale(a).add(&t.scale(b))
    }
}

impl fmt::Display for TractorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.valence as i64;
        writeln!(f, "tractor {k}-form, weight {}, σ^{}", self.wt, self.sigma)?;
        writeln!(f, "  Y [deg {}, wt {}]: {}", k - 1, self.wt.shift(k), self.y)?;
        writeln!(f, "  Z [deg {}, wt {}]: {}", k, self.wt.shift(k), self.z)?;
        writeln!(f, "  W [deg {}, wt {}]: {}", k - 2, self.wt.shift(k - 2), self.w)?;
        write!(f, "  X [deg {}, wt {}]: {}", k - 1, self.wt.shift(k - 2), self.x)
    }
}

pub fn make_m(ctx: FormContext) -> TractorForm {
    TractorForm::make_m(ctx)
}

pub fn apply_box(t: &TractorForm) -> Result<TractorForm> {
    t.apply_box()
}

pub fn apply_mstar(t: &TractorForm) -> Result<FormExpr> {
    t.apply_mstar()
}

pub fn extract_slots(t: &TractorForm) -> (FormExpr, FormExpr) {
    t.extract_slots()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{FormWord, OperatorPoly};

    fn ctx(n: u32, k: u32, w2: i64) -> FormContext {
        FormContext::new(n, k, Half::from_twice(w2)).unwrap()
    }

    fn word(s: &str) -> FormWord {
        FormWord::parse(s).unwrap()
    }

    #[test]
    fn m_slots() {
        let c = ctx(6, 2, 2);
        let m = make_m(c);
        let f = FormExpr::generator(c);
        assert_eq!(m.weight(), Half::from_int(-1));
        assert_eq!(*m.slot(Slot::Z), f.scale_rational(&rat(3, 2)));
        assert_eq!(*m.slot(Slot::X), f.delta());
        assert!(m.slot(Slot::Y).is_zero() && m.slot(Slot::W).is_zero());
        m.check().unwrap();

        let m0 = make_m(ctx(4, 2, 0));
        assert!(m0.slot(Slot::Z).is_zero());
        let (z, g) = m.extract_slots();
        assert_eq!(z, f.scale_rational(&rat(3, 2)));
        assert_eq!(g, f.delta().scale_rational(&rat(1, 2)));
    }

    #[test]
    fn box_on_z_slot_in_four_dimensions() {
        // pure Z-slot μ, valence 1, tractor weight 0
        let c = ctx(4, 1, 2);
        let mu = FormExpr::generator(c);
        let t = TractorForm::from_slots(
            c,
            1,
            Half::ZERO,
            0,
            FormExpr::zero(c, 0),
            mu.clone(),
            FormExpr::zero(c, -1),
            FormExpr::zero(c, 0),
        )
        .unwrap();
        let b = t.apply_box().unwrap();
        assert_eq!(*b.slot(Slot::Y), mu.delta().scale(&RatJ::from_int(-2)));
        let ef_j = FormExpr::from_terms(
            c,
            [(word("dδ"), RatJ::one()), (word("δd"), RatJ::one()), (FormWord::empty(), RatJ::from_int(-1) * RatJ::j())],
        )
        .unwrap();
        assert_eq!(*b.slot(Slot::Z), ef_j);
        assert!(b.slot(Slot::W).is_zero());
        assert_eq!(*b.slot(Slot::X), mu.delta().scale(&jr(rat(-1, 2))));
    }

    #[test]
    fn zero_in_zero_out() {
        let c = ctx(5, 2, 1);
        let t = TractorForm::zero(c, 2, Half::from_twice(-3), 0);
        assert!(t.apply_box().unwrap().is_zero());
        assert!(t.apply_mstar().unwrap().is_zero());
        let (z, g) = t.extract_slots();
        assert!(z.is_zero() && g.is_zero());
    }

    #[test]
    fn mstar_contractions() {
        let c = ctx(6, 2, 2);
        let f = FormExpr::generator(c);
        let wt = Half::from_int(-1);
        let pure_z = TractorForm::from_slots(c, 2, wt, 0, FormExpr::zero(c, 1), f.clone(), FormExpr::zero(c, 0), FormExpr::zero(c, 1))
            .unwrap();
        // −(w̃ + k) = −1
        assert_eq!(pure_z.apply_mstar().unwrap(), f.scale(&RatJ::from_int(-1)));
        let pure_x =
            TractorForm::from_slots(c, 2, wt, 0, FormExpr::zero(c, 1), FormExpr::zero(c, 2), FormExpr::zero(c, 0), f.delta())
                .unwrap();
        assert!(pure_x.apply_mstar().unwrap().is_zero());
    }

    #[test]
    fn mstar_m_calibration() {
        for n in 3..=12u32 {
            for k in 1..=n / 2 {
                for w2 in -12..=12i64 {
                    let c = ctx(n, k, w2);
                    let got = make_m(c).apply_mstar().unwrap();
                    let w = Half::from_twice(w2).to_rational();
                    let expect = -(&w * (&w + Rational::from_integer((n as i64 - 2 * k as i64).into())))
                        / Rational::from_integer((k as i64).into());
                    assert_eq!(got, FormExpr::generator(c).scale_rational(&expect), "n={n} k={k} w2={w2}");
                }
            }
        }
    }

    #[test]
    fn box_is_linear() {
        let c = ctx(7, 3, 1);
        let f = FormExpr::generator(c);
        let s = make_m(c);
        let t = TractorForm::from_slots(
            c,
            3,
            s.weight(),
            0,
            FormExpr::zero(c, 2),
            f.clone(),
            FormExpr::zero(c, 1),
            f.delta().scale(&RatJ::from_int(5)),
        )
        .unwrap();
        let a: RatJ = "3/2".parse().unwrap();
        let b: RatJ = "-2".parse().unwrap();
        for _ in 0..2 {
            let lhs = TractorForm::linear_combination(&a, &s, &b, &t).unwrap().apply_box().unwrap();
            let rhs = TractorForm::linear_combination(&a, &s.apply_box().unwrap(), &b, &t.apply_box().unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn y_and_w_slots_vanish_at_the_critical_weight() {
        for n in 3..=8u32 {
            for k in 1..=n / 2 {
                for ell in 1..=4u32 {
                    let c = FormContext::for_order(n, k, ell).unwrap();
                    let t = make_m(c).apply_box_times(ell).unwrap();
                    assert!(t.slot(Slot::Y).is_zero(), "n={n} k={k} ell={ell}\n{t}");
                    assert!(t.slot(Slot::W).is_zero(), "n={n} k={k} ell={ell}\n{t}");
                    let _: OperatorPoly = t.slot(Slot::Z).to_operator_poly().unwrap();
                }
            }
        }
    }
}
