//! Independent isomorphism test via primary decomposition of the canonical
//! cyclic summands.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{FPModule, HomElem};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rings::gf::factorize;
use crate::rings::{Ring, RingSpec, Value};

/// Isomorphism type of an indecomposable piece: `S/(p^e)`, or free.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum PieceKey {
    Primary(u64, u32),
    Free,
}

/// A primary piece `<mult * e_coord>` of a module, with `beta` the Bezout
/// coefficient recovering `e_coord` from its pieces.
#[derive(Clone, Debug)]
struct Piece {
    key: PieceKey,
    coord: usize,
    mult: Value,
    beta: Value,
}

fn int_value(base: &RingSpec, x: &BigInt) -> Value {
    match base {
        RingSpec::IntegersModN(n) => Value::Res(x.mod_floor(&BigInt::from(*n)).to_u64().unwrap()),
        RingSpec::Integers => Value::Int(x.clone()),
        _ => unreachable!(),
    }
}

/// Splits a cyclic summand of order `order` (an integer) into primary parts.
fn primary_parts(base: &RingSpec, coord: usize, order: u64, out: &mut Vec<Piece>) {
    let parts = factorize(order);
    let ord = BigInt::from(order);
    let mults: Vec<BigInt> = parts
        .iter()
        .map(|(p, e)| &ord / BigInt::from(*p).pow(*e))
        .collect();
    // Bezout coefficients with sum betas_i * mults_i = 1
    let mut acc_gcd = BigInt::zero();
    let mut betas: Vec<BigInt> = Vec::new();
    for m in &mults {
        let e = acc_gcd.extended_gcd(m);
        for c in betas.iter_mut() {
            *c *= &e.x;
        }
        betas.push(e.y);
        acc_gcd = e.gcd;
    }
    for (((p, e), m), b) in parts.iter().zip(&mults).zip(&betas) {
        out.push(Piece {
            key: PieceKey::Primary(*p, *e),
            coord,
            mult: int_value(base, m),
            beta: int_value(base, b),
        });
    }
}

fn pieces(m: &FPModule) -> Result<Vec<Piece>> {
    let base = &m.base;
    let mut out = Vec::new();
    for (i, d) in m.invariants.iter().enumerate() {
        match (base, d) {
            (RingSpec::IntegersModN(n), Value::Res(r)) => {
                let order = if *r == 0 { *n } else { *r };
                primary_parts(base, i, order, &mut out);
            }
            (RingSpec::Integers, Value::Int(x)) => {
                if x.is_zero() {
                    out.push(Piece {
                        key: PieceKey::Free,
                        coord: i,
                        mult: base.one(),
                        beta: base.one(),
                    });
                } else {
                    let order = x.abs().to_u64().ok_or_else(|| {
                        Error::Unsupported("invariant factor exceeds 64 bits".into())
                    })?;
                    primary_parts(base, i, order, &mut out);
                }
            }
            (RingSpec::LocalizedIntegers(p), Value::Rat(r)) => {
                let key = if r.is_zero() {
                    PieceKey::Free
                } else {
                    PieceKey::Primary(*p, crate::rings::pir::valuation_int(r.numer(), *p))
                };
                out.push(Piece { key, coord: i, mult: base.one(), beta: base.one() });
            }
            (RingSpec::FiniteField(_), _) => out.push(Piece {
                key: PieceKey::Free,
                coord: i,
                mult: base.one(),
                beta: base.one(),
            }),
            _ => {
                return Err(Error::Unsupported(format!(
                    "isomorphism test over {}",
                    base.short_name()
                )))
            }
        }
    }
    Ok(out)
}

fn build_map(
    from: &Arc<FPModule>,
    to: &Arc<FPModule>,
    src: &[Piece],
    dst: &[Piece],
    matching: &[usize],
) -> Result<HomElem> {
    let base = &from.base;
    let mut mat = Mat::zeros(base, to.k(), from.k());
    for (s, &t) in src.iter().zip(matching) {
        let target = &dst[t];
        let term = base.mul(&s.beta, &target.mult);
        let v = base.add(mat.get(target.coord, s.coord), &term);
        mat.set(target.coord, s.coord, v);
    }
    HomElem::from_canonical_checked(Arc::clone(from), Arc::clone(to), mat)
}

/// An explicit isomorphism `L -> M`, or `None` when the modules differ.
pub fn iso_oracle(l: &Arc<FPModule>, m: &Arc<FPModule>) -> Result<Option<HomElem>> {
    if l.base != m.base {
        return Err(crate::rings::RingError::MixedRings.into());
    }
    let (pl, pm) = (pieces(l)?, pieces(m)?);
    if pl.len() != pm.len() {
        return Ok(None);
    }
    let mut pool: HashMap<PieceKey, Vec<usize>> = HashMap::new();
    for (i, p) in pm.iter().enumerate().rev() {
        pool.entry(p.key).or_default().push(i);
    }
    let mut forward = Vec::with_capacity(pl.len());
    for p in &pl {
        match pool.get_mut(&p.key).and_then(Vec::pop) {
            Some(i) => forward.push(i),
            None => return Ok(None),
        }
    }
    let mut backward = vec![0; pm.len()];
    for (i, &j) in forward.iter().enumerate() {
        backward[j] = i;
    }
    let phi = build_map(l, m, &pl, &pm, &forward)?;
    let psi = build_map(m, l, &pm, &pl, &backward)?;
    if phi.compose(&psi) != HomElem::identity(Arc::clone(m))
        || psi.compose(&phi) != HomElem::identity(Arc::clone(l))
    {
        return Err(Error::VerificationFailure(
            "isomorphism oracle produced a non-inverse pair".into(),
        ));
    }
    Ok(Some(phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn module(base: &RingSpec, ds: &[Value]) -> Arc<FPModule> {
        Arc::new(FPModule::from_invariants(base.clone(), ds).unwrap())
    }

    #[test]
    fn oracle_examples() {
        let s = RingSpec::zmod(4).unwrap();
        let a = module(&s, &[Value::Res(2), Value::Res(0)]);
        let b = module(&s, &[Value::Res(0), Value::Res(2)]);
        let phi = iso_oracle(&a, &b).unwrap().unwrap();
        assert_eq!(phi.mat.data, vec![Value::Res(0), Value::Res(1), Value::Res(1), Value::Res(0)]);

        let z = RingSpec::Integers;
        let f = Arc::new(FPModule::free(z, 2).unwrap());
        assert_eq!(iso_oracle(&f, &f).unwrap().unwrap(), HomElem::identity(Arc::clone(&f)));

        let c2 = module(&s, &[Value::Res(2)]);
        let c4 = module(&s, &[Value::Res(0)]);
        assert!(iso_oracle(&c2, &c4).unwrap().is_none());
    }

    #[test]
    fn chinese_remainder_splitting() {
        // Z/12 = Z/4 + Z/3 as Z/12-modules
        let s = RingSpec::zmod(12).unwrap();
        let a = module(&s, &[Value::Res(0)]);
        let b = module(&s, &[Value::Res(3), Value::Res(4)]);
        assert!(iso_oracle(&a, &b).unwrap().is_some());
        let z = RingSpec::Integers;
        let c6 = module(&z, &[Value::Int(6.into())]);
        let c23 = module(&z, &[Value::Int(2.into()), Value::Int(3.into())]);
        assert!(iso_oracle(&c6, &c23).unwrap().is_some());
        let c4 = module(&z, &[Value::Int(4.into())]);
        let c22 = module(&z, &[Value::Int(2.into()), Value::Int(2.into())]);
        assert!(iso_oracle(&c4, &c22).unwrap().is_none());
    }
}
