//! Builders for `L_k^ℓ`, `G_k^ℓ` and `M* □^p M`, once through the tractor
//! pipeline and once from closed formulas. The two routes share nothing above
//! the form algebra.

use serde::{Deserialize, Serialize};

use crate::coeff::{rat, Half, RatJ, Rational};
use crate::error::{Error, Result};
use crate::form::{FormContext, FormExpr, OpContext, OperatorPoly};
use crate::tractor::{Slot, TractorForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DefinitionEngine,
    TheoremMain,
    TheoremL1,
}

/// Which shape the factorization of `L_k^ℓ` takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorCase {
    /// `k = n/2`: `(E − F)` times the product over `i < ℓ`.
    MiddleDegree,
    /// Odd `n`, or even `n` with `w ≤ 0`: the product over all `i ≤ ℓ`.
    Plain,
    /// Even `n`, `k < n/2`, `w ≥ 1`: the two square-route factors replace
    /// `i = w, w + 1`.
    SquareRoute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredOperator {
    pub context: FormContext,
    pub ell: u32,
    pub case: FactorCase,
    pub factors: Vec<OperatorPoly>,
    pub provenance: Provenance,
}

impl FactoredOperator {
    pub fn product(&self) -> Result<OperatorPoly> {
        OperatorPoly::product(self.context.op_context(), &self.factors)
    }

    pub fn to_text(&self) -> String {
        self.factors.iter().map(|f| format!("[{}]", f.to_text())).collect::<Vec<_>>().join(" ")
    }

    pub fn to_latex(&self) -> String {
        self.factors.iter().map(|f| format!("\\left({}\\right)", f.to_latex())).collect::<Vec<_>>().join(" ")
    }
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn jc(r: Rational) -> RatJ {
    RatJ::constant(r) * RatJ::j()
}

fn cst(r: Rational) -> RatJ {
    RatJ::constant(r)
}

/// `Box^ℓ M f` at the weight `w = k + ℓ − n/2`.
pub fn l_pipeline(n: u32, k: u32, ell: u32) -> Result<TractorForm> {
    let ctx = FormContext::for_order(n, k, ell)?;
    TractorForm::make_m(ctx).apply_box_times(ell)
}

fn checked_pipeline(n: u32, k: u32, ell: u32) -> Result<TractorForm> {
    let t = l_pipeline(n, k, ell)?;
    for s in [Slot::Y, Slot::W] {
        if !t.slot(s).is_zero() {
            return Err(Error::Internal(format!(
                "slot {s:?} of Box^{ell} M f does not vanish for n = {n}, k = {k}: {}",
                t.slot(s)
            )));
        }
    }
    Ok(t)
}

/// `L_k^ℓ` from its definition: the `Z`-slot of `Box^ℓ M f`.
pub fn build_l_definition(n: u32, k: u32, ell: u32) -> Result<OperatorPoly> {
    let t = checked_pipeline(n, k, ell)?;
    t.slot(Slot::Z)
        .to_operator_poly()
        .map_err(|e| Error::Internal(format!("L for n = {n}, k = {k}, ℓ = {ell}: {e}")))
}

/// `G_k^ℓ f`: the `X`-slot of `Box^ℓ M f` divided by `k`.
pub fn build_g(n: u32, k: u32, ell: u32) -> Result<FormExpr> {
    let t = checked_pipeline(n, k, ell)?;
    Ok(t.extract_slots().1)
}

/// `M* Box^p M` on `k`-forms of weight `w`.
pub fn build_tmodbox(n: u32, k: u32, w: Half, p: u32) -> Result<OperatorPoly> {
    if p < 1 {
        return Err(Error::InvalidParameters("p must be at least 1".into()));
    }
    let ctx = FormContext::new(n, k, w)?;
    TractorForm::make_m(ctx).apply_box_times(p)?.apply_mstar()?.to_operator_poly()
}

/// `(n/2 − k − 1)E + (n/2 − k + 1)F + (2/n)(n/2 − k − 1)(n/2 − k + 1)(n/2 − k)J`.
pub fn closed_l1(n: u32, k: u32) -> Result<OperatorPoly> {
    FormContext::new(n, k, Half::ZERO)?;
    let h = rat(n as i64 - 2 * k as i64, 2);
    let a = &h - q(1);
    let b = &h + q(1);
    let c = q(2) / q(n as i64) * &a * &b * &h;
    Ok(OperatorPoly::linear(OpContext { n, k }, cst(a), cst(b), jc(c)))
}

/// `δ[E + (2/n)(n/2 − k + 1)(n/2 − k)J] f` at weight `k + 1 − n/2`.
pub fn closed_g1(n: u32, k: u32) -> Result<FormExpr> {
    let ctx = FormContext::for_order(n, k, 1)?;
    let h = rat(n as i64 - 2 * k as i64, 2);
    let c = q(2) / q(n as i64) * (&h + q(1)) * &h;
    let f = FormExpr::generator(ctx);
    Ok(f.e().add(&f.scale(&jc(c)))?.delta())
}

/// Factor `i` of the product `P_k^Φ` at weight `w`.
pub fn linear_factor(n: u32, k: u32, w: Half, i: i64) -> OperatorPoly {
    let u = w.to_rational() - q(i);
    let m = q(n as i64 - 2 * k as i64);
    let a = (&u + q(1)) * (&u + &m);
    let b = &u * (&u + &m + q(1));
    let c = -(q(2) / q(n as i64)) * &u * (&u + q(1)) * (&u + &m) * (&u + &m + q(1));
    OperatorPoly::linear(OpContext { n, k }, cst(a), cst(b), jc(c))
}

/// `[(n/2 − k − 1/2)E + (n/2 − k + 1/2)F]` and `[E − F + (4/n)(n/2 − k)J]`.
pub fn square_route_factors(n: u32, k: u32) -> [OperatorPoly; 2] {
    let o = OpContext { n, k };
    let h = rat(n as i64 - 2 * k as i64, 2);
    let half = rat(1, 2);
    let first = OperatorPoly::linear(o, cst(&h - &half), cst(&h + &half), RatJ::zero());
    let second = OperatorPoly::linear(o, RatJ::one(), RatJ::from_int(-1), jc(q(4) / q(n as i64) * &h));
    [first, second]
}

pub fn factor_case(n: u32, k: u32, ell: u32) -> FactorCase {
    let w2 = 2 * (k as i64 + ell as i64) - n as i64;
    if n.is_multiple_of(2) && 2 * k == n {
        FactorCase::MiddleDegree
    } else if n % 2 == 1 || w2 <= 0 {
        FactorCase::Plain
    } else {
        FactorCase::SquareRoute
    }
}

/// The factor list of `L_k^ℓ` (up to a nonzero constant).
pub fn closed_factors(n: u32, k: u32, ell: u32) -> Result<FactoredOperator> {
    let ctx = FormContext::for_order(n, k, ell)?;
    let o = ctx.op_context();
    let case = factor_case(n, k, ell);
    let ell_i = ell as i64;
    let factors = match case {
        FactorCase::MiddleDegree => {
            let mut v = vec![OperatorPoly::linear(o, RatJ::one(), RatJ::from_int(-1), RatJ::zero())];
            v.extend((1..ell_i).map(|i| linear_factor(n, k, ctx.w, i)));
            v
        }
        FactorCase::Plain => (1..=ell_i).map(|i| linear_factor(n, k, ctx.w, i)).collect(),
        FactorCase::SquareRoute => {
            let w = ctx.w.as_int().expect("even n gives an integral weight");
            let mut v: Vec<OperatorPoly> = square_route_factors(n, k).into();
            v.extend((1..=ell_i).filter(|i| *i != w && *i != w + 1).map(|i| linear_factor(n, k, ctx.w, i)));
            v
        }
    };
    debug_assert_eq!(factors.len(), ell as usize);
    Ok(FactoredOperator { context: ctx, ell, case, factors, provenance: Provenance::TheoremMain })
}

/// `L_k^1` in closed form, as a one-factor operator.
pub fn closed_l1_factored(n: u32, k: u32) -> Result<FactoredOperator> {
    let ctx = FormContext::for_order(n, k, 1)?;
    Ok(FactoredOperator {
        context: ctx,
        ell: 1,
        case: factor_case(n, k, 1),
        factors: vec![closed_l1(n, k)?],
        provenance: Provenance::TheoremL1,
    })
}

/// Closed form of `M* Box M` on weight `w`.
pub fn closed_tmodbox_p1(n: u32, k: u32, w: Half) -> OperatorPoly {
    let w = w.to_rational();
    let m = q(n as i64 - 2 * k as i64);
    let a = &w * (&m + &w - q(1));
    let b = (&w - q(1)) * (&m + &w);
    let c = -(q(2) / q(n as i64)) * &w * (&w - q(1)) * (&m + &w) * (&m + &w - q(1));
    let s = -(q(1) / q(k as i64));
    OperatorPoly::linear(OpContext { n, k }, cst(&s * a), cst(&s * b), jc(&s * c))
}

/// Closed form of `M* Box^2 M` on weight `w`.
pub fn closed_tmodbox_p2(n: u32, k: u32, w: Half) -> OperatorPoly {
    use crate::form::Monomial;
    let o = OpContext { n, k };
    let w = w.to_rational();
    let m = q(n as i64 - 2 * k as i64);
    let nn = q(n as i64);
    let mw = &m + &w;
    let e2 = &w * (&mw - q(2));
    let f2 = (&w - q(2)) * &mw;
    let je = -(q(2) / &nn) * &w * (&mw - q(2)) * ((&w - q(1)) * &mw + (&w - q(2)) * (&mw - q(1)));
    let jf = -(q(2) / &nn) * (&w - q(2)) * &mw * ((&w - q(1)) * (&mw - q(2)) + &w * (&mw - q(1)));
    let jj = q(4) / (&nn * &nn) * &w * (&w - q(1)) * (&w - q(2)) * &mw * (&mw - q(1)) * (&mw - q(2));
    let s = RatJ::constant(-(q(1) / q(k as i64)));
    let mut op = OperatorPoly::monomial(o, Monomial::E(2), cst(e2));
    for (mono, c) in [
        (Monomial::F(2), cst(f2)),
        (Monomial::E(1), jc(je)),
        (Monomial::F(1), jc(jf)),
        (Monomial::One, jc(jj) * RatJ::j()),
    ] {
        op = op.add(&OperatorPoly::monomial(o, mono, c)).expect("same context");
    }
    op.scale(&s)
}

/// The factored closed form of `M* Box^2 M` on weight 1.
pub fn closed_tmodbox_p2_w1(n: u32, k: u32) -> OperatorPoly {
    let [a, b] = square_route_factors(n, k);
    a.mul(&b).expect("same context").scale(&RatJ::constant(-(q(2) / q(k as i64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use crate::form::Proportionality;

    fn c(v: i64) -> RatJ {
        RatJ::from_int(v)
    }

    fn rj(s: &str) -> RatJ {
        s.parse().unwrap()
    }

    fn lin(n: u32, k: u32, a: &str, b: &str, cc: &str) -> OperatorPoly {
        OperatorPoly::linear(OpContext { n, k }, rj(a), rj(b), rj(cc))
    }

    #[test]
    fn closed_l1_values() {
        assert_eq!(closed_l1(8, 2).unwrap(), lin(8, 2, "1", "3", "3/2*J"));
        assert_eq!(closed_l1(4, 2).unwrap(), lin(4, 2, "-1", "1", "0"));
        assert_eq!(closed_l1(6, 1).unwrap(), lin(6, 1, "1", "3", "2*J"));
    }

    #[test]
    fn closed_factor_lists() {
        let f = closed_factors(8, 2, 1).unwrap();
        assert_eq!(f.factors, vec![lin(8, 2, "-2", "-6", "-3*J")]);
        let f = closed_factors(4, 2, 2).unwrap();
        assert_eq!(f.case, FactorCase::MiddleDegree);
        assert_eq!(f.factors, vec![lin(4, 2, "1", "-1", "0"), lin(4, 2, "2", "2", "-2*J")]);
        let f = closed_factors(6, 1, 3).unwrap();
        assert_eq!(f.case, FactorCase::SquareRoute);
        assert_eq!(
            f.factors,
            vec![lin(6, 1, "3/2", "5/2", "0"), lin(6, 1, "1", "-1", "4/3*J"), lin(6, 1, "-2", "-6", "-4*J")]
        );
        assert!(closed_factors(3, 2, 1).is_err());
    }

    #[test]
    fn definition_engine_low_order() {
        // proportional to E − F in the middle degree
        let l = build_l_definition(4, 2, 1).unwrap();
        let emf = lin(4, 2, "1", "-1", "0");
        assert!(matches!(l.proportionality(&emf).unwrap(), Proportionality::Scalar(_)));
        // proportional to F for n = 4, k = 1
        let l = build_l_definition(4, 1, 1).unwrap();
        assert!(matches!(l.proportionality(&lin(4, 1, "0", "1", "0")).unwrap(), Proportionality::Scalar(_)));
    }

    #[test]
    fn definition_is_closed_l1_over_k() {
        for n in 3..=12u32 {
            for k in 1..=n / 2 {
                let def = build_l_definition(n, k, 1).unwrap();
                let closed = closed_l1(n, k).unwrap();
                assert_eq!(closed, def.scale(&c(k as i64)), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn g_at_order_one() {
        let g = build_g(4, 1, 1).unwrap();
        let ctx = FormContext::for_order(4, 1, 1).unwrap();
        let f = FormExpr::generator(ctx);
        let expect = f.e().delta().add(&f.delta().scale(&RatJ::j())).unwrap();
        assert_eq!(closed_g1(4, 1).unwrap(), expect);
        // same k-normalization as L
        for n in 3..=10u32 {
            for k in 1..=n / 2 {
                let g = build_g(n, k, 1).unwrap();
                assert_eq!(closed_g1(n, k).unwrap(), g.scale(&c(k as i64)), "n={n} k={k}");
            }
        }
        assert_eq!(g.scale(&c(1)), expect);
    }

    #[test]
    fn tmodbox_examples() {
        let got = build_tmodbox(6, 2, Half::from_int(1), 1).unwrap();
        assert_eq!(got, lin(6, 2, "-1", "0", "0"));
        assert_eq!(closed_tmodbox_p1(6, 2, Half::from_int(1)), got);
        let w0 = closed_tmodbox_p1(7, 2, Half::ZERO);
        assert_eq!(w0, OperatorPoly::linear(OpContext { n: 7, k: 2 }, c(0), RatJ::constant(rat(3, 2)), c(0)));
        let e = closed_tmodbox_p2_w1(6, 1);
        let [a, b] = square_route_factors(6, 1);
        assert_eq!(e, a.mul(&b).unwrap().scale(&c(-2)));
        assert_eq!(closed_tmodbox_p2(6, 1, Half::from_int(1)), e);
    }

    #[test]
    fn tmodbox_engine_matches_closed_forms() {
        for n in 3..=9u32 {
            for k in 1..=n / 2 {
                for w2 in -8..=8i64 {
                    let w = Half::from_twice(w2);
                    assert_eq!(build_tmodbox(n, k, w, 1).unwrap(), closed_tmodbox_p1(n, k, w), "p=1 n={n} k={k} w={w}");
                    assert_eq!(build_tmodbox(n, k, w, 2).unwrap(), closed_tmodbox_p2(n, k, w), "p=2 n={n} k={k} w={w}");
                }
            }
        }
    }
}
