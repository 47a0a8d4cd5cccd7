//! A valuation domain of Laurent fractions in countably many variables: the
//! exponent-vector valuation `γ`, membership and unit tests, and an explicit
//! witness that `b + a*d*s*c` can always be pushed into a maximal ideal for
//! `(a, b, c) = (x1, x2, 1)`.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use parse::parse_frac;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeinzerError {
    #[error("gamma is undefined at zero")]
    ZeroElement,
    #[error("element does not lie in the valuation ring")]
    NotInR,
    #[error("internal identity check failed: {0}")]
    InternalIdentityFailure(String),
    #[error("empty list")]
    EmptyList,
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at position {pos}: {message}")]
    Parse { pos: usize, message: String },
}

/// Finitely supported integer vector indexed by positive variable indices.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpVec(BTreeMap<u32, i64>);

impl ExpVec {
    pub fn zero() -> Self {
        ExpVec(BTreeMap::new())
    }

    /// The basis vector `e_i`.
    pub fn unit(i: u32) -> Self {
        Self::from_pairs(&[(i, 1)])
    }

    pub fn from_pairs(pairs: &[(u32, i64)]) -> Self {
        let mut v = ExpVec::zero();
        for &(i, g) in pairs {
            v.set(i, v.get(i) + g);
        }
        v
    }

    /// Dense constructor: entry `k` is the exponent of `x_{k+1}`.
    pub fn from_dense(gs: &[i64]) -> Self {
        let pairs: Vec<(u32, i64)> = gs.iter().enumerate().map(|(k, &g)| (k as u32 + 1, g)).collect();
        Self::from_pairs(&pairs)
    }

    pub fn get(&self, i: u32) -> i64 {
        self.0.get(&i).copied().unwrap_or(0)
    }

    fn set(&mut self, i: u32, g: i64) {
        if g == 0 {
            self.0.remove(&i);
        } else {
            self.0.insert(i, g);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.0.iter().map(|(&i, &g)| (i, g))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest variable index with a nonzero entry.
    pub fn top_index(&self) -> Option<u32> {
        self.0.keys().next_back().copied()
    }

    fn zip_with(&self, other: &ExpVec, f: impl Fn(i64, i64) -> i64) -> ExpVec {
        let keys: BTreeSet<u32> = self.0.keys().chain(other.0.keys()).copied().collect();
        let mut out = ExpVec::zero();
        for i in keys {
            out.set(i, f(self.get(i), other.get(i)));
        }
        out
    }

    pub fn leq(&self, other: &ExpVec) -> bool {
        let keys: BTreeSet<u32> = self.0.keys().chain(other.0.keys()).copied().collect();
        keys.into_iter().all(|i| self.get(i) <= other.get(i))
    }

    pub fn inf(&self, other: &ExpVec) -> ExpVec {
        self.zip_with(other, i64::min)
    }

    pub fn sup(&self, other: &ExpVec) -> ExpVec {
        self.zip_with(other, i64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.values().all(|&g| g >= 0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.top_index().unwrap_or(0);
        serde_json::json!((1..=n).map(|i| self.get(i)).collect::<Vec<_>>())
    }
}

impl Add for &ExpVec {
    type Output = ExpVec;
    fn add(self, other: &ExpVec) -> ExpVec {
        self.zip_with(other, |a, b| a + b)
    }
}

impl Sub for &ExpVec {
    type Output = ExpVec;
    fn sub(self, other: &ExpVec) -> ExpVec {
        self.zip_with(other, |a, b| a - b)
    }
}

impl Debug for ExpVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Display for ExpVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.top_index().unwrap_or(0);
        write!(f, "(")?;
        for i in 1..=n {
            if i > 1 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.get(i))?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderOp {
    Leq,
    Inf,
    Sup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderResult {
    Bool(bool),
    Vec(ExpVec),
}

/// `leq` compares the first two entries; `inf` and `sup` fold the list.
pub fn expvec_order(op: OrderOp, xs: &[ExpVec]) -> Result<OrderResult, HeinzerError> {
    let first = xs.first().ok_or(HeinzerError::EmptyList)?;
    Ok(match op {
        OrderOp::Leq => OrderResult::Bool(xs.windows(2).all(|w| w[0].leq(&w[1]))),
        OrderOp::Inf => OrderResult::Vec(xs[1..].iter().fold(first.clone(), |a, b| a.inf(b))),
        OrderOp::Sup => OrderResult::Vec(xs[1..].iter().fold(first.clone(), |a, b| a.sup(b))),
    })
}

/// Coefficient field for Laurent polynomials.
pub trait Coeff: Clone + PartialEq + Debug + Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(n: i64, d: i64) -> Option<Self>;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool {
        false
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(n: i64, d: i64) -> Option<Self> {
        (d != 0).then(|| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// Element of the prime field `F_P`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fp<const P: u64>(pub u64);

impl<const P: u64> Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Coeff for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1 % P)
    }
    fn from_ratio(n: i64, d: i64) -> Option<Self> {
        let d = Fp::<P>(d.rem_euclid(P as i64) as u64).inv()?;
        Some(Fp(n.rem_euclid(P as i64) as u64).mul(&d))
    }
    fn add(&self, o: &Self) -> Self {
        Fp((self.0 + o.0) % P)
    }
    fn mul(&self, o: &Self) -> Self {
        Fp(((self.0 as u128 * o.0 as u128) % P as u128) as u64)
    }
    fn neg(&self) -> Self {
        Fp((P - self.0) % P)
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        let (mut acc, mut base, mut e) = (1u128, self.0 as u128, P - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P as u128;
            }
            base = base * base % P as u128;
            e >>= 1;
        }
        Some(Fp(acc as u64))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

/// Laurent polynomial: finitely many monomials with nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<C: Coeff = BigRational> {
    terms: BTreeMap<ExpVec, C>,
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, ExpVec::zero())
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn monomial(c: C, e: ExpVec) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LaurentPoly { terms }
    }

    /// The variable `x_i`.
    pub fn var(i: u32) -> Self {
        Self::monomial(C::one(), ExpVec::unit(i))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVec, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_monomial(&self) -> Option<(&ExpVec, &C)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn accumulate(&mut self, e: ExpVec, c: C) {
        let merged = match self.terms.get(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if merged.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, merged);
        }
    }

    /// Componentwise infimum of the exponents of all monomials.
    pub fn gamma(&self) -> Option<ExpVec> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, e| acc.inf(e)))
    }
}

impl<C: Coeff> Add for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, o: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.accumulate(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Neg for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn neg(self) -> LaurentPoly<C> {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }
}

impl<C: Coeff> Sub for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, o: &LaurentPoly<C>) -> LaurentPoly<C> {
        self + &(-o)
    }
}

impl<C: Coeff> Mul for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, o: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.accumulate(e1 + e2, c1.mul(c2));
            }
        }
        out
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, e: &ExpVec) -> fmt::Result {
    let mut first = true;
    for (i, g) in e.entries() {
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if g == 1 {
            write!(f, "x{i}")?;
        } else {
            write!(f, "x{i}^{g}")?;
        }
    }
    Ok(())
}

impl<C: Coeff> Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, c.neg()) } else { (false, c.clone()) };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit_coeff = mag == C::one();
            if e.is_zero() {
                write!(f, "{mag}")?;
            } else if unit_coeff {
                write_monomial(f, e)?;
            } else {
                write!(f, "{mag}*")?;
                write_monomial(f, e)?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

/// Fraction of Laurent polynomials; never reduced.
#[derive(Clone)]
pub struct LaurentFrac<C: Coeff = BigRational> {
    pub num: LaurentPoly<C>,
    pub den: LaurentPoly<C>,
}

impl<C: Coeff> PartialEq for LaurentFrac<C> {
    fn eq(&self, o: &Self) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }
}

impl<C: Coeff> LaurentFrac<C> {
    pub fn new(num: LaurentPoly<C>, den: LaurentPoly<C>) -> Result<Self, HeinzerError> {
        if den.is_zero() {
            return Err(HeinzerError::DivisionByZero);
        }
        Ok(LaurentFrac { num, den })
    }

    pub fn from_poly(p: LaurentPoly<C>) -> Self {
        LaurentFrac { num: p, den: LaurentPoly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(LaurentPoly::one())
    }

    pub fn var(i: u32) -> Self {
        Self::from_poly(LaurentPoly::var(i))
    }

    pub fn monomial(e: ExpVec) -> Self {
        Self::from_poly(LaurentPoly::monomial(C::one(), e))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return LaurentFrac { num: &self.num + &o.num, den: self.den.clone() };
        }
        LaurentFrac {
            num: &(&self.num * &o.den) + &(&o.num * &self.den),
            den: &self.den * &o.den,
        }
    }

    pub fn neg(&self) -> Self {
        LaurentFrac { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        LaurentFrac { num: &self.num * &o.num, den: &self.den * &o.den }
    }

    pub fn inv(&self) -> Result<Self, HeinzerError> {
        LaurentFrac::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self, HeinzerError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, HeinzerError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

impl<C: Coeff> Display for LaurentFrac<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == LaurentPoly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl<C: Coeff> Debug for LaurentFrac<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

/// `γ(p/q) = γ(p) - γ(q)`.
pub fn gamma<C: Coeff>(f: &LaurentFrac<C>) -> Result<ExpVec, HeinzerError> {
    let gn = f.num.gamma().ok_or(HeinzerError::ZeroElement)?;
    let gd = f.den.gamma().ok_or(HeinzerError::DivisionByZero)?;
    Ok(&gn - &gd)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub in_r: bool,
    pub is_unit_of_r: bool,
    /// Indices `i` with `f` in `x_i R`.
    pub maximal_ideal_indices: BTreeSet<u32>,
}

pub fn classify<C: Coeff>(f: &LaurentFrac<C>) -> Result<Classification, HeinzerError> {
    let g = gamma(f)?;
    Ok(Classification {
        in_r: g.is_nonnegative(),
        is_unit_of_r: g.is_zero(),
        maximal_ideal_indices: g.entries().filter(|&(_, e)| e >= 1).map(|(i, _)| i).collect(),
    })
}

fn in_r<C: Coeff>(f: &LaurentFrac<C>) -> Result<bool, HeinzerError> {
    if f.is_zero() {
        return Ok(true);
    }
    Ok(classify(f)?.in_r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefutationWitness<C: Coeff = BigRational> {
    /// Unit of `R` pushing `b + a*d*s*c` into `x_{ideal_index} R`.
    pub s: LaurentFrac<C>,
    pub ideal_index: u32,
    /// Cofactor: `b + a*d*s*c = x_{ideal_index} * v`.
    pub v: LaurentFrac<C>,
    pub m: u32,
    pub u: LaurentFrac<C>,
    pub t: LaurentFrac<C>,
}

/// For `(a, b, c) = (x1, x2, 1)` and `d` in `R`, a unit `s` of `R` with
/// `b + a*d*s*c` in a maximal ideal, together with the verified cofactor.
pub fn refutation_witness<C: Coeff>(d: &LaurentFrac<C>) -> Result<RefutationWitness<C>, HeinzerError> {
    if !in_r(d)? {
        return Err(HeinzerError::NotInR);
    }
    let (a, b) = (LaurentFrac::<C>::var(1), LaurentFrac::<C>::var(2));
    let w = if d.is_zero() {
        RefutationWitness {
            s: LaurentFrac::one(),
            ideal_index: 2,
            v: LaurentFrac::one(),
            m: 1,
            u: LaurentFrac::one(),
            t: LaurentFrac::zero(),
        }
    } else {
        let g = gamma(d)?;
        let m = g.top_index().unwrap_or(0).max(2);
        let xg = LaurentFrac::monomial(g.clone());
        let u = d.div(&xg)?;
        let t = a.mul(&xg);
        let xm1 = LaurentFrac::var(m + 1);
        let denom = xm1.add(&t);
        let s = u.inv()?.mul(&xm1.sub(&b).div(&denom)?);
        let v = b.add(&t).div(&denom)?;
        RefutationWitness { s, ideal_index: m + 1, v, m, u, t }
    };
    let lhs = b.add(&a.mul(d).mul(&w.s));
    let rhs = LaurentFrac::var(w.ideal_index).mul(&w.v);
    if lhs != rhs {
        return Err(HeinzerError::InternalIdentityFailure(
            "b + a*d*s*c differs from x_{m+1} * v".into(),
        ));
    }
    if !gamma(&w.s)?.is_zero() {
        return Err(HeinzerError::InternalIdentityFailure("s is not a unit of R".into()));
    }
    if !in_r(&w.v)? {
        return Err(HeinzerError::InternalIdentityFailure("v is not in R".into()));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = LaurentFrac<BigRational>;

    fn p(s: &str) -> Q {
        parse_frac(s).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&p("5*x1^2*x2^-1")).unwrap(), ExpVec::from_dense(&[2, -1]));
        assert_eq!(gamma(&p("x1 + x2")).unwrap(), ExpVec::zero());
        assert_eq!(gamma(&p("(x1)/(x1 + x2)")).unwrap(), ExpVec::unit(1));
        assert_eq!(gamma(&Q::zero()), Err(HeinzerError::ZeroElement));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&p("x1 + x2")).unwrap();
        assert!(c.in_r && c.is_unit_of_r && c.maximal_ideal_indices.is_empty());
        let c = classify(&p("1/x1")).unwrap();
        assert!(!c.in_r && !c.is_unit_of_r && c.maximal_ideal_indices.is_empty());
        let c = classify(&p("x1/(x1+x2)")).unwrap();
        assert!(c.in_r && !c.is_unit_of_r);
        assert_eq!(c.maximal_ideal_indices, BTreeSet::from([1]));
    }

    #[test]
    fn order_examples() {
        let a = ExpVec::from_dense(&[2, -1]);
        let b = ExpVec::from_dense(&[0, 3]);
        assert_eq!(
            expvec_order(OrderOp::Leq, &[ExpVec::from_dense(&[1, 0]), ExpVec::from_dense(&[1, 2])]).unwrap(),
            OrderResult::Bool(true)
        );
        assert_eq!(
            expvec_order(OrderOp::Inf, &[a.clone(), b.clone()]).unwrap(),
            OrderResult::Vec(ExpVec::from_dense(&[0, -1]))
        );
        assert_eq!(
            expvec_order(OrderOp::Sup, &[a.clone(), b]).unwrap(),
            OrderResult::Vec(ExpVec::from_dense(&[2, 3]))
        );
        assert_eq!(expvec_order(OrderOp::Inf, std::slice::from_ref(&a)).unwrap(), OrderResult::Vec(a));
        assert_eq!(expvec_order(OrderOp::Sup, &[]), Err(HeinzerError::EmptyList));
    }

    #[test]
    fn refutation_closed_forms() {
        let w = refutation_witness(&Q::zero()).unwrap();
        assert_eq!((w.s.clone(), w.ideal_index), (Q::one(), 2));

        let w = refutation_witness(&p("x1*x2")).unwrap();
        assert_eq!(w.m, 2);
        assert_eq!(w.u, Q::one());
        assert_eq!(w.t, p("x1^2*x2"));
        assert_eq!(w.s, p("(x3 - x2)/(x3 + x1^2*x2)"));
        assert_eq!(w.v, p("(x2 + x1^2*x2)/(x3 + x1^2*x2)"));
        assert_eq!(w.ideal_index, 3);

        let w = refutation_witness(&p("x1")).unwrap();
        assert_eq!(w.m, 2);
        assert_eq!(w.t, p("x1^2"));
        assert_eq!(w.s, p("(x3 - x2)/(x3 + x1^2)"));
        assert_eq!(w.v, p("(x2 + x1^2)/(x3 + x1^2)"));

        assert_eq!(refutation_witness(&p("1/x1")), Err(HeinzerError::NotInR));
    }

    #[test]
    fn fixed_data_is_unimodular() {
        // x1*1 + x2*1 is a unit of R, so x1 R + x2 R = R
        assert!(classify(&p("x1 + x2")).unwrap().is_unit_of_r);
    }

    #[test]
    fn prime_field_coefficients() {
        let d: LaurentFrac<Fp<7>> = LaurentFrac::from_poly(
            &LaurentPoly::monomial(Fp(3), ExpVec::from_dense(&[1, 1])) + &LaurentPoly::constant(Fp(1)),
        );
        let w = refutation_witness(&d).unwrap();
        assert_eq!(w.ideal_index, 3);
    }

    fn arb_poly(nonneg: bool) -> impl Strategy<Value = LaurentPoly> {
        let lo = if nonneg { 0 } else { -2 };
        prop::collection::vec(
            (prop::collection::vec(lo..3i64, 3), -9i64..=9, 1i64..=9),
            1..4,
        )
        .prop_map(|ts| {
            let mut p = LaurentPoly::zero();
            for (e, n, d) in ts {
                p = &p + &LaurentPoly::monomial(BigRational::new(n.into(), d.into()), ExpVec::from_dense(&e));
            }
            p
        })
    }

    fn arb_frac(nonneg: bool) -> impl Strategy<Value = Q> {
        (arb_poly(nonneg), arb_poly(nonneg))
            .prop_filter("nonzero", |(a, b)| !a.is_zero() && !b.is_zero())
            .prop_map(|(a, b)| LaurentFrac::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn gamma_is_a_homomorphism(f in arb_frac(false), g in arb_frac(false)) {
            let fg = f.mul(&g);
            prop_assert_eq!(gamma(&fg).unwrap(), &gamma(&f).unwrap() + &gamma(&g).unwrap());
        }

        #[test]
        fn gamma_is_superadditive(f in arb_frac(false), g in arb_frac(false)) {
            let s = f.add(&g);
            prop_assume!(!s.is_zero());
            let lower = gamma(&f).unwrap().inf(&gamma(&g).unwrap());
            prop_assert!(lower.leq(&gamma(&s).unwrap()));
        }

        #[test]
        fn valuation_ring_is_closed(f in arb_poly(true), g in arb_poly(true)) {
            let (f, g) = (Q::from_poly(f), Q::from_poly(g));
            prop_assert!(in_r(&f.add(&g)).unwrap());
            prop_assert!(in_r(&f.mul(&g)).unwrap());
        }

        #[test]
        fn witnesses_classify_correctly(n in arb_poly(true), c in -9i64..=9) {
            prop_assume!(c != 0);
            let den = &LaurentPoly::constant(BigRational::from_integer(c.into())) + &LaurentPoly::var(3);
            let d = LaurentFrac::new(n, den).unwrap();
            prop_assume!(in_r(&d).unwrap());
            let w = refutation_witness(&d).unwrap();
            prop_assert!(classify(&w.s).unwrap().is_unit_of_r);
            prop_assert!(classify(&w.v).unwrap().in_r);
            let lhs = Q::var(2).add(&Q::var(1).mul(&d).mul(&w.s));
            prop_assert!(classify(&lhs).unwrap().maximal_ideal_indices.contains(&w.ideal_index));
        }
    }
}
