//! Ring kernel: concrete ring backends with canonical element forms, and the
//! element-level oracles (inverses, central units, Jacobson radical,
//! unit-regular witnesses, stable-range-1 witnesses) consumed by the
//! elimination procedures.

pub mod gf;
pub mod pir;

use std::collections::HashSet;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gf::GaloisField;

/// Finite rings larger than this are refused by the enumerating oracles.
pub const MAX_ENUMERATION: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("operands belong to different rings")]
    MixedRings,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("ring is infinite")]
    InfiniteRing,
    #[error("ring has {0} elements, above the enumeration cap of {MAX_ENUMERATION}")]
    TooLarge(u64),
    #[error("element is not unit-regular")]
    NotUnitRegular,
    #[error("pair is not unimodular")]
    NotUnimodular,
    #[error("no stable-range witness exists for this pair")]
    NoWitnessFound,
    #[error("invalid ring data: {0}")]
    Invalid(String),
    #[error("unsupported backend: {0}")]
    Unsupported(String),
}

/// Which side the stable-range shortening acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `a + b*d` is a unit, given `aE + bE = E`.
    Right,
    /// `a + d*b` is a unit, given `Ea + Eb = E`.
    Left,
}

/// An associative unital ring together with the oracles that the elimination
/// procedures need.
///
/// The default oracle implementations scan a finite ring exhaustively; backends
/// with a closed form override them.
pub trait Ring {
    type Elem: Clone + Eq + Hash + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn try_inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_finite(&self) -> bool;
    fn is_commutative(&self) -> bool;
    /// All elements in the ring's fixed enumeration order.
    fn elements(&self) -> Result<Vec<Self::Elem>, RingError>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.try_inverse(a).is_some()
    }

    fn mul3(&self, a: &Self::Elem, b: &Self::Elem, c: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(a, b), c)
    }

    fn units(&self) -> Result<Vec<Self::Elem>, RingError> {
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| self.is_unit(x))
            .collect())
    }

    fn central_units(&self) -> Result<Vec<Self::Elem>, RingError> {
        let all = self.elements()?;
        Ok(all
            .iter()
            .filter(|u| self.is_unit(u))
            .filter(|u| all.iter().all(|x| self.mul(u, x) == self.mul(x, u)))
            .cloned()
            .collect())
    }

    fn is_central_unit(&self, s: &Self::Elem) -> Result<bool, RingError> {
        if !self.is_unit(s) {
            return Ok(false);
        }
        if self.is_commutative() {
            return Ok(true);
        }
        Ok(self
            .elements()?
            .iter()
            .all(|x| self.mul(s, x) == self.mul(x, s)))
    }

    /// `x` lies in the Jacobson radical iff `1 + a*x` is a unit for every `a`.
    fn in_jacobson(&self, x: &Self::Elem) -> Result<bool, RingError> {
        let one = self.one();
        Ok(self
            .elements()?
            .iter()
            .all(|a| self.is_unit(&self.add(&one, &self.mul(a, x)))))
    }

    /// Some unit `u` with `a*u*a = a`, first in enumeration order.
    /// The identity is tried first, then units in enumeration order.
    fn unit_regular_witness(&self, a: &Self::Elem) -> Result<Option<Self::Elem>, RingError> {
        if self.mul(a, a) == *a {
            return Ok(Some(self.one()));
        }
        Ok(self
            .units()?
            .into_iter()
            .find(|u| self.mul3(a, u, a) == *a))
    }

    /// Some unit `u` with `a - a*u*a` in the Jacobson radical.
    fn unit_regular_mod_jacobson(
        &self,
        a: &Self::Elem,
    ) -> Result<Option<Self::Elem>, RingError> {
        for u in self.units()? {
            if self.in_jacobson(&self.sub(a, &self.mul3(a, &u, a)))? {
                return Ok(Some(u));
            }
        }
        Ok(None)
    }

    /// Some `(x, y)` with `a*x + b*y = 1`.
    fn right_unimodular_witness(
        &self,
        a: &Self::Elem,
        b: &Self::Elem,
    ) -> Result<Option<(Self::Elem, Self::Elem)>, RingError> {
        let all = self.elements()?;
        let one = self.one();
        for x in &all {
            let rest = self.sub(&one, &self.mul(a, x));
            if let Some(y) = all.iter().find(|y| self.mul(b, y) == rest) {
                return Ok(Some((x.clone(), y.clone())));
            }
        }
        Ok(None)
    }

    /// Some `(x, y)` with `x*a + y*b = 1`.
    fn left_unimodular_witness(
        &self,
        a: &Self::Elem,
        b: &Self::Elem,
    ) -> Result<Option<(Self::Elem, Self::Elem)>, RingError> {
        let all = self.elements()?;
        let one = self.one();
        for x in &all {
            let rest = self.sub(&one, &self.mul(x, a));
            if let Some(y) = all.iter().find(|y| self.mul(y, b) == rest) {
                return Ok(Some((x.clone(), y.clone())));
            }
        }
        Ok(None)
    }

    /// `d` with `a + b*d` (right) or `a + d*b` (left) a unit; first hit in
    /// enumeration order.
    fn sr1_pair_witness(
        &self,
        a: &Self::Elem,
        b: &Self::Elem,
        side: Side,
    ) -> Result<Self::Elem, RingError> {
        if self.is_unit(a) {
            return Ok(self.zero());
        }
        let shifted = |d: &Self::Elem| match side {
            Side::Right => self.add(a, &self.mul(b, d)),
            Side::Left => self.add(a, &self.mul(d, b)),
        };
        for d in self.elements()? {
            if self.is_unit(&shifted(&d)) {
                return Ok(d);
            }
        }
        let unimodular = match side {
            Side::Right => self.right_unimodular_witness(a, b)?,
            Side::Left => self.left_unimodular_witness(a, b)?,
        };
        Err(if unimodular.is_some() {
            RingError::NoWitnessFound
        } else {
            RingError::NotUnimodular
        })
    }
}

/// Jacobson radical by the quasi-regularity scan `1 + a*x*b` unit for all `a, b`.
pub fn jacobson_radical<R: Ring>(ring: &R) -> Result<Vec<R::Elem>, RingError> {
    let all = ring.elements()?;
    let one = ring.one();
    Ok(all
        .iter()
        .filter(|x| {
            all.iter().all(|a| {
                all.iter()
                    .all(|b| ring.is_unit(&ring.add(&one, &ring.mul3(a, x, b))))
            })
        })
        .cloned()
        .collect())
}

/// True iff every unimodular pair admits a stable-range-1 witness, checked
/// exhaustively over all pairs.
pub fn stable_rank_le_1<R: Ring>(ring: &R) -> Result<bool, RingError> {
    let all = ring.elements()?;
    let units: HashSet<R::Elem> = ring.units()?.into_iter().collect();
    // the ideal aE + bE is all of E iff some a*x + b*y = 1; collect right ideals lazily
    for a in &all {
        let a_mult: HashSet<R::Elem> = all.iter().map(|x| ring.mul(a, x)).collect();
        for b in &all {
            let b_mult: Vec<R::Elem> = all.iter().map(|y| ring.mul(b, y)).collect();
            let one = ring.one();
            let unimodular = b_mult
                .iter()
                .any(|by| a_mult.contains(&ring.sub(&one, by)));
            if !unimodular {
                continue;
            }
            let ok = all
                .iter()
                .any(|d| units.contains(&ring.add(a, &ring.mul(b, d))));
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Canonical element payload. Which variant is valid depends on the ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    /// Residue `0 <= r < n` in `Z/n`.
    Res(u64),
    /// Packed `GF(q)` element.
    Gf(u64),
    /// Row-major square matrix.
    Mat(Vec<Value>),
    /// Product ring component tuple.
    Tuple(Vec<Value>),
    Int(BigInt),
    /// Reduced fraction.
    Rat(BigRational),
}

impl Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Res(r) | Value::Gf(r) => write!(f, "{r}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => write!(f, "{r}"),
            Value::Mat(entries) | Value::Tuple(entries) => {
                let open = if matches!(self, Value::Mat(_)) { "[" } else { "(" };
                let close = if matches!(self, Value::Mat(_)) { "]" } else { ")" };
                write!(f, "{open}")?;
                for (i, e) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "{close}")
            }
        }
    }
}

impl Value {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Res(r) | Value::Gf(r) => serde_json::json!(r),
            Value::Int(n) => match n.to_i64() {
                Some(v) => serde_json::json!(v),
                None => serde_json::json!(n.to_string()),
            },
            Value::Rat(r) => {
                if r.is_integer() {
                    match r.numer().to_i64() {
                        Some(v) => serde_json::json!(v),
                        None => serde_json::json!(r.to_string()),
                    }
                } else {
                    serde_json::json!(r.to_string())
                }
            }
            Value::Mat(es) | Value::Tuple(es) => {
                serde_json::Value::Array(es.iter().map(Value::to_json).collect())
            }
        }
    }
}

/// A concrete ring backend.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingSpec {
    IntegersModN(u64),
    FiniteField(GaloisField),
    MatrixRing(Box<RingSpec>, usize),
    Product(Vec<RingSpec>),
    Integers,
    /// `Z` localized at the prime `(p)`; `p = 0` gives the rationals.
    LocalizedIntegers(u64),
}

/// Serializable description of a ring, as it appears in scenario files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RingDesc {
    Zmod { n: u64 },
    Field { q: u64 },
    Matrix { base: Box<RingDesc>, size: usize },
    Product { factors: Vec<RingDesc> },
    Integers,
    Localized { p: u64 },
}

impl RingSpec {
    pub fn zmod(n: u64) -> Result<Self, RingError> {
        if n < 2 {
            return Err(RingError::Invalid(format!("Z/{n} needs n >= 2")));
        }
        Ok(RingSpec::IntegersModN(n))
    }

    pub fn finite_field(q: u64) -> Result<Self, RingError> {
        GaloisField::new(q)
            .map(RingSpec::FiniteField)
            .ok_or_else(|| RingError::Invalid(format!("{q} is not a prime power")))
    }

    pub fn matrix(base: RingSpec, size: usize) -> Result<Self, RingError> {
        if size == 0 {
            return Err(RingError::Invalid("matrix size must be positive".into()));
        }
        if !base.is_commutative() {
            return Err(RingError::Unsupported(
                "matrix rings need a commutative base".into(),
            ));
        }
        Ok(RingSpec::MatrixRing(Box::new(base), size))
    }

    pub fn product(factors: Vec<RingSpec>) -> Result<Self, RingError> {
        if factors.is_empty() {
            return Err(RingError::Invalid("empty product".into()));
        }
        Ok(RingSpec::Product(factors))
    }

    pub fn localized(p: u64) -> Result<Self, RingError> {
        if p != 0 && !gf::is_prime(p) {
            return Err(RingError::Invalid(format!("{p} is not prime")));
        }
        Ok(RingSpec::LocalizedIntegers(p))
    }

    pub fn from_desc(desc: &RingDesc) -> Result<Self, RingError> {
        match desc {
            RingDesc::Zmod { n } => Self::zmod(*n),
            RingDesc::Field { q } => Self::finite_field(*q),
            RingDesc::Matrix { base, size } => Self::matrix(Self::from_desc(base)?, *size),
            RingDesc::Product { factors } => {
                Self::product(factors.iter().map(Self::from_desc).collect::<Result<_, _>>()?)
            }
            RingDesc::Integers => Ok(RingSpec::Integers),
            RingDesc::Localized { p } => Self::localized(*p),
        }
    }

    pub fn to_desc(&self) -> RingDesc {
        match self {
            RingSpec::IntegersModN(n) => RingDesc::Zmod { n: *n },
            RingSpec::FiniteField(f) => RingDesc::Field { q: f.q },
            RingSpec::MatrixRing(b, s) => RingDesc::Matrix {
                base: Box::new(b.to_desc()),
                size: *s,
            },
            RingSpec::Product(fs) => RingDesc::Product {
                factors: fs.iter().map(RingSpec::to_desc).collect(),
            },
            RingSpec::Integers => RingDesc::Integers,
            RingSpec::LocalizedIntegers(p) => RingDesc::Localized { p: *p },
        }
    }

    /// Short names used on the command line: `Zmod6`, `F4`, `M2F2`, `M2Zmod4`,
    /// `Z`, `Q`, `Z(5)`.
    pub fn parse_short(name: &str) -> Result<Self, RingError> {
        let bad = || RingError::Invalid(format!("unknown ring name `{name}`"));
        let name = name.trim();
        if name == "Z" {
            return Ok(RingSpec::Integers);
        }
        if name == "Q" {
            return Ok(RingSpec::LocalizedIntegers(0));
        }
        if let Some(rest) = name.strip_prefix("Zmod") {
            return Self::zmod(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = name.strip_prefix("Z(").and_then(|r| r.strip_suffix(')')) {
            return Self::localized(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = name.strip_prefix('F').or_else(|| name.strip_prefix("GF")) {
            return Self::finite_field(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = name.strip_prefix('M') {
            let split = rest.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
            let size: usize = rest[..split].parse().map_err(|_| bad())?;
            return Self::matrix(Self::parse_short(&rest[split..])?, size);
        }
        Err(bad())
    }

    pub fn short_name(&self) -> String {
        match self {
            RingSpec::IntegersModN(n) => format!("Zmod{n}"),
            RingSpec::FiniteField(f) => format!("F{}", f.q),
            RingSpec::MatrixRing(b, s) => format!("M{s}{}", b.short_name()),
            RingSpec::Product(fs) => fs
                .iter()
                .map(RingSpec::short_name)
                .collect::<Vec<_>>()
                .join("x"),
            RingSpec::Integers => "Z".into(),
            RingSpec::LocalizedIntegers(0) => "Q".into(),
            RingSpec::LocalizedIntegers(p) => format!("Z({p})"),
        }
    }

    pub fn cardinality(&self) -> Option<u64> {
        match self {
            RingSpec::IntegersModN(n) => Some(*n),
            RingSpec::FiniteField(f) => Some(f.q),
            RingSpec::MatrixRing(b, s) => {
                let c = b.cardinality()?;
                c.checked_pow((s * s) as u32)
            }
            RingSpec::Product(fs) => fs
                .iter()
                .try_fold(1u64, |acc, f| acc.checked_mul(f.cardinality()?)),
            RingSpec::Integers | RingSpec::LocalizedIntegers(_) => None,
        }
    }

    /// The element with the given index in the enumeration order. Matrix
    /// entries and product components use the first slot as least significant
    /// digit.
    pub fn element_at(&self, idx: u64) -> Value {
        match self {
            RingSpec::IntegersModN(_) => Value::Res(idx),
            RingSpec::FiniteField(_) => Value::Gf(idx),
            RingSpec::MatrixRing(b, s) => {
                let c = b.cardinality().expect("finite base");
                let mut idx = idx;
                Value::Mat(
                    (0..s * s)
                        .map(|_| {
                            let v = b.element_at(idx % c);
                            idx /= c;
                            v
                        })
                        .collect(),
                )
            }
            RingSpec::Product(fs) => {
                let mut idx = idx;
                Value::Tuple(
                    fs.iter()
                        .map(|f| {
                            let c = f.cardinality().expect("finite factor");
                            let v = f.element_at(idx % c);
                            idx /= c;
                            v
                        })
                        .collect(),
                )
            }
            RingSpec::Integers | RingSpec::LocalizedIntegers(_) => {
                panic!("infinite rings cannot be indexed")
            }
        }
    }

    pub fn from_int(&self, k: i64) -> Value {
        match self {
            RingSpec::IntegersModN(n) => Value::Res(k.rem_euclid(*n as i64) as u64),
            RingSpec::FiniteField(f) => Value::Gf(f.from_int(k)),
            RingSpec::MatrixRing(b, s) => {
                let mut es = vec![b.from_int(0); s * s];
                for i in 0..*s {
                    es[i * s + i] = b.from_int(k);
                }
                Value::Mat(es)
            }
            RingSpec::Product(fs) => Value::Tuple(fs.iter().map(|f| f.from_int(k)).collect()),
            RingSpec::Integers => Value::Int(BigInt::from(k)),
            RingSpec::LocalizedIntegers(_) => Value::Rat(BigRational::from_integer(k.into())),
        }
    }

    /// Checks that a payload is a canonical element of this ring.
    pub fn validate(&self, v: &Value) -> Result<(), RingError> {
        let bad = || RingError::Invalid(format!("{v} is not a canonical element of {}", self.short_name()));
        match (self, v) {
            (RingSpec::IntegersModN(n), Value::Res(r)) if r < n => Ok(()),
            (RingSpec::FiniteField(f), Value::Gf(r)) if *r < f.q => Ok(()),
            (RingSpec::MatrixRing(b, s), Value::Mat(es)) if es.len() == s * s => {
                es.iter().try_for_each(|e| b.validate(e))
            }
            (RingSpec::Product(fs), Value::Tuple(es)) if es.len() == fs.len() => {
                fs.iter().zip(es).try_for_each(|(f, e)| f.validate(e))
            }
            (RingSpec::Integers, Value::Int(_)) => Ok(()),
            (RingSpec::LocalizedIntegers(p), Value::Rat(r)) => {
                if *p != 0 && r.denom().is_multiple_of(&BigInt::from(*p)) {
                    Err(bad())
                } else {
                    Ok(())
                }
            }
            _ => Err(bad()),
        }
    }

    /// Reads an element from JSON: integers, `"a/b"` strings, or nested
    /// arrays for matrices and tuples.
    pub fn value_from_json(&self, j: &serde_json::Value) -> Result<Value, RingError> {
        let bad = || RingError::Invalid(format!("cannot read {j} as an element of {}", self.short_name()));
        let as_int = |j: &serde_json::Value| -> Option<BigInt> {
            match j {
                serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
                serde_json::Value::String(s) => s.trim().parse().ok(),
                _ => None,
            }
        };
        let v = match self {
            RingSpec::IntegersModN(n) => {
                let k = as_int(j).ok_or_else(bad)?;
                let r = k.mod_floor(&BigInt::from(*n));
                Value::Res(r.to_u64().unwrap())
            }
            RingSpec::FiniteField(f) => {
                let k = as_int(j).ok_or_else(bad)?;
                if k.is_negative() || k >= BigInt::from(f.q) {
                    return Err(bad());
                }
                Value::Gf(k.to_u64().unwrap())
            }
            RingSpec::Integers => Value::Int(as_int(j).ok_or_else(bad)?),
            RingSpec::LocalizedIntegers(_) => match j {
                serde_json::Value::String(s) if s.contains('/') => {
                    let (a, b) = s.split_once('/').unwrap();
                    let a: BigInt = a.trim().parse().map_err(|_| bad())?;
                    let b: BigInt = b.trim().parse().map_err(|_| bad())?;
                    if b.is_zero() {
                        return Err(bad());
                    }
                    Value::Rat(BigRational::new(a, b))
                }
                _ => Value::Rat(BigRational::from_integer(as_int(j).ok_or_else(bad)?)),
            },
            RingSpec::MatrixRing(b, s) => {
                let rows = j.as_array().ok_or_else(bad)?;
                let mut es = Vec::new();
                if rows.len() == s * s && !rows[0].is_array() {
                    for e in rows {
                        es.push(b.value_from_json(e)?);
                    }
                } else {
                    if rows.len() != *s {
                        return Err(bad());
                    }
                    for r in rows {
                        let r = r.as_array().ok_or_else(bad)?;
                        if r.len() != *s {
                            return Err(bad());
                        }
                        for e in r {
                            es.push(b.value_from_json(e)?);
                        }
                    }
                }
                Value::Mat(es)
            }
            RingSpec::Product(fs) => {
                let parts = j.as_array().ok_or_else(bad)?;
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                Value::Tuple(
                    fs.iter()
                        .zip(parts)
                        .map(|(f, p)| f.value_from_json(p))
                        .collect::<Result<_, _>>()?,
                )
            }
        };
        self.validate(&v)?;
        Ok(v)
    }

    /// Matrix-unit `e_ij` (1-based) in a matrix ring.
    pub fn matrix_unit(&self, i: usize, j: usize) -> Value {
        match self {
            RingSpec::MatrixRing(b, s) => {
                let mut es = vec![b.from_int(0); s * s];
                es[(i - 1) * s + (j - 1)] = b.from_int(1);
                Value::Mat(es)
            }
            _ => panic!("matrix_unit on a non-matrix ring"),
        }
    }

    fn det(&self, entries: &[Value], s: usize) -> Value {
        if s == 1 {
            return entries[0].clone();
        }
        let mut acc = self.zero();
        for c in 0..s {
            let minor: Vec<Value> = (1..s)
                .flat_map(|r| {
                    (0..s)
                        .filter(move |&cc| cc != c)
                        .map(move |cc| entries[r * s + cc].clone())
                })
                .collect();
            let term = self.mul(&entries[c], &self.det(&minor, s - 1));
            acc = if c % 2 == 0 {
                self.add(&acc, &term)
            } else {
                self.sub(&acc, &term)
            };
        }
        acc
    }

    /// Jacobson radical membership by closed form for each backend.
    fn jac_closed_form(&self, x: &Value) -> bool {
        match (self, x) {
            (RingSpec::IntegersModN(n), Value::Res(r)) => {
                let rad: u64 = gf::factorize(*n).iter().map(|(p, _)| p).product();
                r % rad == 0
            }
            (RingSpec::FiniteField(_), Value::Gf(r)) => *r == 0,
            (RingSpec::MatrixRing(b, _), Value::Mat(es)) => es.iter().all(|e| b.jac_closed_form(e)),
            (RingSpec::Product(fs), Value::Tuple(es)) => {
                fs.iter().zip(es).all(|(f, e)| f.jac_closed_form(e))
            }
            (RingSpec::Integers, Value::Int(k)) => k.is_zero(),
            (RingSpec::LocalizedIntegers(0), Value::Rat(r)) => r.is_zero(),
            (RingSpec::LocalizedIntegers(p), Value::Rat(r)) => {
                r.numer().is_multiple_of(&BigInt::from(*p))
            }
            _ => panic!("value {x} does not belong to {}", self.short_name()),
        }
    }
}

impl Ring for RingSpec {
    type Elem = Value;

    fn zero(&self) -> Value {
        self.from_int(0)
    }

    fn one(&self) -> Value {
        self.from_int(1)
    }

    fn add(&self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (RingSpec::IntegersModN(n), Value::Res(x), Value::Res(y)) => Value::Res((x + y) % n),
            (RingSpec::FiniteField(f), Value::Gf(x), Value::Gf(y)) => Value::Gf(f.add(*x, *y)),
            (RingSpec::MatrixRing(r, _), Value::Mat(x), Value::Mat(y)) => {
                Value::Mat(x.iter().zip(y).map(|(u, v)| r.add(u, v)).collect())
            }
            (RingSpec::Product(fs), Value::Tuple(x), Value::Tuple(y)) => Value::Tuple(
                fs.iter()
                    .zip(x.iter().zip(y))
                    .map(|(f, (u, v))| f.add(u, v))
                    .collect(),
            ),
            (RingSpec::Integers, Value::Int(x), Value::Int(y)) => Value::Int(x + y),
            (RingSpec::LocalizedIntegers(_), Value::Rat(x), Value::Rat(y)) => Value::Rat(x + y),
            _ => panic!("add: {a} and {b} do not belong to {}", self.short_name()),
        }
    }

    fn neg(&self, a: &Value) -> Value {
        match (self, a) {
            (RingSpec::IntegersModN(n), Value::Res(x)) => Value::Res((n - x) % n),
            (RingSpec::FiniteField(f), Value::Gf(x)) => Value::Gf(f.neg(*x)),
            (RingSpec::MatrixRing(r, _), Value::Mat(x)) => {
                Value::Mat(x.iter().map(|u| r.neg(u)).collect())
            }
            (RingSpec::Product(fs), Value::Tuple(x)) => {
                Value::Tuple(fs.iter().zip(x).map(|(f, u)| f.neg(u)).collect())
            }
            (RingSpec::Integers, Value::Int(x)) => Value::Int(-x),
            (RingSpec::LocalizedIntegers(_), Value::Rat(x)) => Value::Rat(-x),
            _ => panic!("neg: {a} does not belong to {}", self.short_name()),
        }
    }

    fn mul(&self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (RingSpec::IntegersModN(n), Value::Res(x), Value::Res(y)) => {
                Value::Res(((*x as u128 * *y as u128) % *n as u128) as u64)
            }
            (RingSpec::FiniteField(f), Value::Gf(x), Value::Gf(y)) => Value::Gf(f.mul(*x, *y)),
            (RingSpec::MatrixRing(r, s), Value::Mat(x), Value::Mat(y)) => {
                let s = *s;
                let mut out = Vec::with_capacity(s * s);
                for i in 0..s {
                    for j in 0..s {
                        let mut acc = r.zero();
                        for k in 0..s {
                            acc = r.add(&acc, &r.mul(&x[i * s + k], &y[k * s + j]));
                        }
                        out.push(acc);
                    }
                }
                Value::Mat(out)
            }
            (RingSpec::Product(fs), Value::Tuple(x), Value::Tuple(y)) => Value::Tuple(
                fs.iter()
                    .zip(x.iter().zip(y))
                    .map(|(f, (u, v))| f.mul(u, v))
                    .collect(),
            ),
            (RingSpec::Integers, Value::Int(x), Value::Int(y)) => Value::Int(x * y),
            (RingSpec::LocalizedIntegers(_), Value::Rat(x), Value::Rat(y)) => Value::Rat(x * y),
            _ => panic!("mul: {a} and {b} do not belong to {}", self.short_name()),
        }
    }

    fn try_inverse(&self, a: &Value) -> Option<Value> {
        match (self, a) {
            (RingSpec::IntegersModN(n), Value::Res(x)) => {
                let g = BigInt::from(*x).extended_gcd(&BigInt::from(*n));
                if g.gcd.is_one() {
                    let inv = g.x.mod_floor(&BigInt::from(*n));
                    Some(Value::Res(inv.to_u64().unwrap()))
                } else {
                    None
                }
            }
            (RingSpec::FiniteField(f), Value::Gf(x)) => f.inv(*x).map(Value::Gf),
            (RingSpec::MatrixRing(r, s), Value::Mat(x)) => {
                let s = *s;
                let det = r.det(x, s);
                let det_inv = r.try_inverse(&det)?;
                if s == 1 {
                    return Some(Value::Mat(vec![det_inv]));
                }
                let mut out = vec![r.zero(); s * s];
                for i in 0..s {
                    for j in 0..s {
                        let minor: Vec<Value> = (0..s)
                            .filter(|&rr| rr != i)
                            .flat_map(|rr| {
                                (0..s)
                                    .filter(move |&cc| cc != j)
                                    .map(move |cc| x[rr * s + cc].clone())
                            })
                            .collect();
                        let mut cof = r.det(&minor, s - 1);
                        if (i + j) % 2 == 1 {
                            cof = r.neg(&cof);
                        }
                        // adjugate is the transposed cofactor matrix
                        out[j * s + i] = r.mul(&cof, &det_inv);
                    }
                }
                Some(Value::Mat(out))
            }
            (RingSpec::Product(fs), Value::Tuple(x)) => Some(Value::Tuple(
                fs.iter()
                    .zip(x)
                    .map(|(f, u)| f.try_inverse(u))
                    .collect::<Option<_>>()?,
            )),
            (RingSpec::Integers, Value::Int(x)) => {
                if x.abs().is_one() {
                    Some(Value::Int(x.clone()))
                } else {
                    None
                }
            }
            (RingSpec::LocalizedIntegers(p), Value::Rat(x)) => {
                if x.is_zero() || (*p != 0 && x.numer().is_multiple_of(&BigInt::from(*p))) {
                    None
                } else {
                    Some(Value::Rat(x.recip()))
                }
            }
            _ => panic!("inverse: {a} does not belong to {}", self.short_name()),
        }
    }

    fn is_finite(&self) -> bool {
        self.cardinality().is_some()
    }

    fn is_commutative(&self) -> bool {
        match self {
            RingSpec::MatrixRing(b, s) => *s == 1 && b.is_commutative(),
            RingSpec::Product(fs) => fs.iter().all(RingSpec::is_commutative),
            _ => true,
        }
    }

    fn elements(&self) -> Result<Vec<Value>, RingError> {
        match self {
            RingSpec::Integers | RingSpec::LocalizedIntegers(_) => Err(RingError::InfiniteRing),
            _ => {
                let c = self.cardinality().ok_or(RingError::TooLarge(u64::MAX))?;
                if c > MAX_ENUMERATION {
                    return Err(RingError::TooLarge(c));
                }
                Ok((0..c).map(|i| self.element_at(i)).collect())
            }
        }
    }

    fn units(&self) -> Result<Vec<Value>, RingError> {
        if *self == RingSpec::Integers {
            return Ok(vec![self.one(), self.neg(&self.one())]);
        }
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| self.is_unit(x))
            .collect())
    }

    fn central_units(&self) -> Result<Vec<Value>, RingError> {
        match self {
            RingSpec::MatrixRing(b, _) => Ok(b
                .units()?
                .iter()
                .map(|u| self.scalar(u))
                .collect()),
            RingSpec::Product(fs) => {
                let parts: Vec<Vec<Value>> =
                    fs.iter().map(|f| f.central_units()).collect::<Result<_, _>>()?;
                let mut out: Vec<Vec<Value>> = vec![vec![]];
                // first component varies fastest, matching the enumeration order
                for part in parts.iter() {
                    let mut next = Vec::new();
                    for u in part {
                        for prefix in &out {
                            let mut t = prefix.clone();
                            t.push(u.clone());
                            next.push(t);
                        }
                    }
                    out = next;
                }
                let mut tuples: Vec<Value> = out.into_iter().map(Value::Tuple).collect();
                tuples.sort_by_key(|t| self.index_of(t));
                Ok(tuples)
            }
            _ if self.is_commutative() => self.units(),
            _ => {
                let all = self.elements()?;
                Ok(all
                    .iter()
                    .filter(|u| self.is_unit(u))
                    .filter(|u| all.iter().all(|x| self.mul(u, x) == self.mul(x, u)))
                    .cloned()
                    .collect())
            }
        }
    }

    fn is_central_unit(&self, s: &Value) -> Result<bool, RingError> {
        if !self.is_unit(s) {
            return Ok(false);
        }
        match (self, s) {
            (RingSpec::MatrixRing(b, n), Value::Mat(es)) => {
                let d = &es[0];
                Ok((0..n * n).all(|k| {
                    if k / n == k % n {
                        es[k] == *d
                    } else {
                        b.is_zero(&es[k])
                    }
                }))
            }
            (RingSpec::Product(fs), Value::Tuple(es)) => {
                for (f, e) in fs.iter().zip(es) {
                    if !f.is_central_unit(e)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(self.is_commutative()),
        }
    }

    fn in_jacobson(&self, x: &Value) -> Result<bool, RingError> {
        Ok(self.jac_closed_form(x))
    }

    fn unit_regular_mod_jacobson(&self, a: &Value) -> Result<Option<Value>, RingError> {
        match self {
            RingSpec::LocalizedIntegers(_) => {
                // the residue ring is a field
                Ok(Some(self.try_inverse(a).unwrap_or_else(|| self.one())))
            }
            RingSpec::Integers => {
                if self.is_zero(a) {
                    Ok(Some(self.one()))
                } else {
                    Ok(self.try_inverse(a))
                }
            }
            _ => {
                if let Some(u) = self.unit_regular_witness(a)? {
                    return Ok(Some(u));
                }
                for u in self.units()? {
                    if self.jac_closed_form(&self.sub(a, &self.mul3(a, &u, a))) {
                        return Ok(Some(u));
                    }
                }
                Ok(None)
            }
        }
    }

    fn right_unimodular_witness(
        &self,
        a: &Value,
        b: &Value,
    ) -> Result<Option<(Value, Value)>, RingError> {
        match self {
            RingSpec::Integers => {
                let (Value::Int(x), Value::Int(y)) = (a, b) else {
                    unreachable!()
                };
                let g = x.extended_gcd(y);
                if g.gcd.is_one() {
                    Ok(Some((Value::Int(g.x), Value::Int(g.y))))
                } else if (-&g.gcd).is_one() {
                    Ok(Some((Value::Int(-g.x), Value::Int(-g.y))))
                } else {
                    Ok(None)
                }
            }
            RingSpec::LocalizedIntegers(_) => {
                if let Some(inv) = self.try_inverse(a) {
                    Ok(Some((inv, self.zero())))
                } else if let Some(inv) = self.try_inverse(b) {
                    Ok(Some((self.zero(), inv)))
                } else {
                    Ok(None)
                }
            }
            _ => {
                let all = self.elements()?;
                let one = self.one();
                for x in &all {
                    let rest = self.sub(&one, &self.mul(a, x));
                    if let Some(y) = all.iter().find(|y| self.mul(b, y) == rest) {
                        return Ok(Some((x.clone(), y.clone())));
                    }
                }
                Ok(None)
            }
        }
    }

    fn left_unimodular_witness(
        &self,
        a: &Value,
        b: &Value,
    ) -> Result<Option<(Value, Value)>, RingError> {
        if self.is_commutative() {
            return self.right_unimodular_witness(a, b);
        }
        let all = self.elements()?;
        let one = self.one();
        for x in &all {
            let rest = self.sub(&one, &self.mul(x, a));
            if let Some(y) = all.iter().find(|y| self.mul(y, b) == rest) {
                return Ok(Some((x.clone(), y.clone())));
            }
        }
        Ok(None)
    }

    fn sr1_pair_witness(&self, a: &Value, b: &Value, side: Side) -> Result<Value, RingError> {
        match self {
            RingSpec::LocalizedIntegers(_) => {
                if self.is_unit(a) {
                    Ok(self.zero())
                } else if self.is_unit(b) {
                    Ok(self.one())
                } else {
                    Err(RingError::NotUnimodular)
                }
            }
            RingSpec::Integers => {
                if self.is_unit(a) {
                    return Ok(self.zero());
                }
                let (Value::Int(x), Value::Int(y)) = (a, b) else {
                    unreachable!()
                };
                if !x.gcd(y).is_one() {
                    return Err(RingError::NotUnimodular);
                }
                for target in [BigInt::one(), -BigInt::one()] {
                    let diff = target - x;
                    if !y.is_zero() && diff.is_multiple_of(y) {
                        return Ok(Value::Int(diff / y));
                    }
                }
                Err(RingError::NoWitnessFound)
            }
            _ => {
                if self.is_unit(a) {
                    return Ok(self.zero());
                }
                let shifted = |d: &Value| match side {
                    Side::Right => self.add(a, &self.mul(b, d)),
                    Side::Left => self.add(a, &self.mul(d, b)),
                };
                for d in self.elements()? {
                    if self.is_unit(&shifted(&d)) {
                        return Ok(d);
                    }
                }
                let unimodular = match side {
                    Side::Right => self.right_unimodular_witness(a, b)?,
                    Side::Left => self.left_unimodular_witness(a, b)?,
                };
                Err(if unimodular.is_some() {
                    RingError::NoWitnessFound
                } else {
                    RingError::NotUnimodular
                })
            }
        }
    }
}

impl RingSpec {
    /// Scalar matrix `u * I` in a matrix ring.
    pub fn scalar(&self, u: &Value) -> Value {
        match self {
            RingSpec::MatrixRing(b, s) => {
                let mut es = vec![b.zero(); s * s];
                for i in 0..*s {
                    es[i * s + i] = u.clone();
                }
                Value::Mat(es)
            }
            _ => u.clone(),
        }
    }

    /// Position of an element in the enumeration order (finite rings).
    pub fn index_of(&self, v: &Value) -> u64 {
        match (self, v) {
            (RingSpec::IntegersModN(_), Value::Res(r)) | (RingSpec::FiniteField(_), Value::Gf(r)) => *r,
            (RingSpec::MatrixRing(b, _), Value::Mat(es)) => {
                let c = b.cardinality().unwrap();
                es.iter().rev().fold(0, |acc, e| acc * c + b.index_of(e))
            }
            (RingSpec::Product(fs), Value::Tuple(es)) => fs
                .iter()
                .zip(es)
                .rev()
                .fold(0, |acc, (f, e)| acc * f.cardinality().unwrap() + f.index_of(e)),
            _ => panic!("index_of on infinite ring"),
        }
    }

    pub fn elem(self: &Arc<Self>, value: Value) -> Result<RingElem, RingError> {
        self.validate(&value)?;
        Ok(RingElem {
            ring: Arc::clone(self),
            value,
        })
    }
}

/// A ring element tagged with the ring it belongs to.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RingElem {
    pub ring: Arc<RingSpec>,
    pub value: Value,
}

/// Binary operations exposed by [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithResult {
    Elem(RingElem),
    Bool(bool),
}

/// Checked arithmetic on tagged elements. `Neg` ignores `y`.
pub fn arith(op: ArithOp, x: &RingElem, y: &RingElem) -> Result<ArithResult, RingError> {
    if x.ring != y.ring {
        return Err(RingError::MixedRings);
    }
    let r = &x.ring;
    let wrap = |value| {
        ArithResult::Elem(RingElem {
            ring: Arc::clone(r),
            value,
        })
    };
    Ok(match op {
        ArithOp::Add => wrap(r.add(&x.value, &y.value)),
        ArithOp::Mul => wrap(r.mul(&x.value, &y.value)),
        ArithOp::Neg => wrap(r.neg(&x.value)),
        ArithOp::Eq => ArithResult::Bool(x.value == y.value),
    })
}

impl RingElem {
    pub fn try_inverse(&self) -> Result<RingElem, RingError> {
        self.ring
            .try_inverse(&self.value)
            .map(|value| RingElem {
                ring: Arc::clone(&self.ring),
                value,
            })
            .ok_or(RingError::NotAUnit)
    }
}

pub fn rat(n: i64, d: i64) -> Value {
    Value::Rat(BigRational::new(n.into(), d.into()))
}
