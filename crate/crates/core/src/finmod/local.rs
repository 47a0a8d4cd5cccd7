//! Spectra, localization at primes, and gluing of local data over `Z/n`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{FPModule, HomElem};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rings::gf::factorize;
use crate::rings::pir::valuation_int;
use crate::rings::{Ring, RingSpec, Value};

/// A prime ideal `(p)` of the base ring; `p = 0` is the zero ideal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SpecPoint {
    pub prime: u64,
    /// Dimension of the closure of the point inside `X`.
    pub dim_in_x: u32,
}

impl SpecPoint {
    pub fn maximal(p: u64) -> Self {
        SpecPoint { prime: p, dim_in_x: 0 }
    }

    /// Containment of prime ideals: `(0)` lies in every prime.
    pub fn contains(&self, other: &SpecPoint) -> bool {
        self.prime == other.prime || other.prime == 0
    }
}

impl fmt::Display for SpecPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.prime)
    }
}

/// `X = j-Spec(S) ∩ Supp(N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecView {
    pub ring: RingSpec,
    /// Explicitly materialized points.
    pub points: Vec<SpecPoint>,
    /// Every maximal ideal of `Z` (with dimension 0) also belongs to `X`.
    pub all_primes: bool,
}

impl SpecView {
    pub fn contains(&self, p: &SpecPoint) -> bool {
        self.points.iter().any(|q| q.prime == p.prime)
            || (self.all_primes && p.prime != 0 && crate::rings::gf::is_prime(p.prime))
    }

    /// The point with dimension filled in, if it lies in `X`.
    pub fn point(&self, prime: u64) -> Option<SpecPoint> {
        if let Some(q) = self.points.iter().find(|q| q.prime == prime) {
            return Some(*q);
        }
        let p = SpecPoint::maximal(prime);
        self.contains(&p).then_some(p)
    }
}

fn invariant_or_n(base: &RingSpec, d: &Value) -> u64 {
    match (base, d) {
        (RingSpec::IntegersModN(n), Value::Res(0)) => *n,
        (_, Value::Res(r)) => *r,
        _ => unreachable!(),
    }
}

pub fn spec_view(n: &FPModule) -> Result<SpecView> {
    let base = &n.base;
    let mut points = Vec::new();
    let mut all_primes = false;
    match base {
        RingSpec::IntegersModN(_) => {
            for (p, _) in factorize(invariant_or_n(base, &base.zero())) {
                if n
                    .invariants
                    .iter()
                    .any(|d| invariant_or_n(base, d).is_multiple_of(p))
                {
                    points.push(SpecPoint::maximal(p));
                }
            }
        }
        RingSpec::FiniteField(_) | RingSpec::LocalizedIntegers(0) => {
            if !n.is_zero() {
                points.push(SpecPoint::maximal(0));
            }
        }
        RingSpec::Integers => {
            if n.invariants.iter().any(|d| base.is_zero(d)) {
                all_primes = true;
                points.push(SpecPoint { prime: 0, dim_in_x: 1 });
            } else {
                let mut primes: Vec<u64> = Vec::new();
                for d in &n.invariants {
                    let Value::Int(x) = d else { unreachable!() };
                    let x: u64 = x.try_into().map_err(|_| {
                        Error::Unsupported("invariant factor exceeds 64 bits".into())
                    })?;
                    primes.extend(factorize(x).into_iter().map(|(p, _)| p));
                }
                primes.sort_unstable();
                primes.dedup();
                points.extend(primes.into_iter().map(SpecPoint::maximal));
            }
        }
        RingSpec::LocalizedIntegers(p) => {
            if !n.is_zero() {
                points.push(SpecPoint::maximal(*p));
            }
            if n.invariants.iter().any(|d| base.is_zero(d)) {
                points.push(SpecPoint { prime: 0, dim_in_x: 1 });
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "spectrum of {}",
                base.short_name()
            )))
        }
    }
    Ok(SpecView {
        ring: base.clone(),
        points,
        all_primes,
    })
}

/// The localized base ring at a point.
pub fn local_base(base: &RingSpec, p: &SpecPoint) -> Result<RingSpec> {
    let bad = || Error::PointNotInSpectrum(format!("{p} in {}", base.short_name()));
    match base {
        RingSpec::IntegersModN(n) => {
            if p.prime == 0 || n % p.prime != 0 {
                return Err(bad());
            }
            let v = valuation_int(&BigInt::from(*n), p.prime);
            Ok(RingSpec::IntegersModN(p.prime.pow(v)))
        }
        RingSpec::FiniteField(_) | RingSpec::LocalizedIntegers(0) => {
            if p.prime == 0 {
                Ok(base.clone())
            } else {
                Err(bad())
            }
        }
        RingSpec::Integers => {
            if p.prime == 0 || crate::rings::gf::is_prime(p.prime) {
                Ok(RingSpec::LocalizedIntegers(p.prime))
            } else {
                Err(bad())
            }
        }
        RingSpec::LocalizedIntegers(q) => {
            if p.prime == *q || p.prime == 0 {
                Ok(RingSpec::LocalizedIntegers(p.prime))
            } else {
                Err(bad())
            }
        }
        _ => Err(Error::Unsupported(format!(
            "localization of {}",
            base.short_name()
        ))),
    }
}

/// Image of an element under `S -> S_p`.
pub fn localize_value(base: &RingSpec, local: &RingSpec, x: &Value) -> Value {
    match (base, local, x) {
        (RingSpec::IntegersModN(_), RingSpec::IntegersModN(m), Value::Res(r)) => Value::Res(r % m),
        (RingSpec::Integers, _, Value::Int(k)) => Value::Rat(BigRational::from_integer(k.clone())),
        _ => x.clone(),
    }
}

/// A localized module together with the canonical coordinates of the global
/// module that survive localization.
#[derive(Clone, Debug)]
pub struct LocalModule {
    pub point: SpecPoint,
    pub module: Arc<FPModule>,
    pub coords: Vec<usize>,
}

pub fn localize_module(n: &FPModule, p: &SpecPoint) -> Result<LocalModule> {
    let lb = local_base(&n.base, p)?;
    let mut ds = Vec::new();
    let mut coords = Vec::new();
    for (i, d) in n.invariants.iter().enumerate() {
        let (g, _) = lb.normalize(&localize_value(&n.base, &lb, d))?;
        if !lb.is_unit(&g) {
            ds.push(g);
            coords.push(i);
        }
    }
    Ok(LocalModule {
        point: *p,
        module: Arc::new(FPModule::from_invariants(lb, &ds)?),
        coords,
    })
}

/// Localizes a map between already-localized endpoints.
pub fn localize_hom(h: &HomElem, from: &LocalModule, to: &LocalModule) -> HomElem {
    let lb = &from.module.base;
    let mat = Mat::from_fn(to.coords.len(), from.coords.len(), |i, j| {
        localize_value(h.base(), lb, h.mat.get(to.coords[i], from.coords[j]))
    });
    HomElem::from_canonical(Arc::clone(&from.module), Arc::clone(&to.module), mat)
}

/// The CRT idempotent of `Z/n` that is `1` at `p` and `0` at the other primes.
pub fn crt_idempotent(n: u64, p: u64) -> u64 {
    let pv = p.pow(valuation_int(&BigInt::from(n), p));
    let rest = n / pv;
    if rest == 1 {
        return 1 % n;
    }
    let inv = RingSpec::IntegersModN(pv)
        .try_inverse(&Value::Res(rest % pv))
        .map(|v| match v {
            Value::Res(r) => r,
            _ => unreachable!(),
        })
        .unwrap_or(0);
    ((rest as u128 * inv as u128) % n as u128) as u64
}

/// Glues local maps (one per listed point, others taken to be zero) into a
/// global map over a finite backend.
pub fn glue(
    from: &Arc<FPModule>,
    to: &Arc<FPModule>,
    locals: &[(LocalModule, LocalModule, HomElem)],
) -> Result<HomElem> {
    let base = &from.base;
    let mut mat = Mat::zeros(base, to.k(), from.k());
    match base {
        RingSpec::IntegersModN(n) => {
            for (lf, lt, h) in locals {
                let eps = Value::Res(crt_idempotent(*n, lf.point.prime));
                for (a, &i) in lt.coords.iter().enumerate() {
                    for (b, &j) in lf.coords.iter().enumerate() {
                        let Value::Res(x) = h.mat.get(a, b) else { unreachable!() };
                        let term = base.mul(&eps, &Value::Res(x % n));
                        let v = base.add(mat.get(i, j), &term);
                        mat.set(i, j, v);
                    }
                }
            }
        }
        RingSpec::FiniteField(_) => {
            if let Some((_, _, h)) = locals.first() {
                mat = h.mat.clone();
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "gluing over {}",
                base.short_name()
            )))
        }
    }
    HomElem::from_canonical_checked(Arc::clone(from), Arc::clone(to), mat)
}
