//! The endomorphism ring `End_S(N)` as a [`Ring`] backend.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock, RwLock};

use super::{hom_elements, hom_group, inverse, FPModule, HomElem};
use crate::linalg::Mat;
use crate::rings::{Ring, RingError, Side, Value, MAX_ENUMERATION};

/// `End_S(N)` with multiplication `a * b = a ∘ b`.
///
/// When `N` is free of rank one the ring is identified with the base ring and
/// every oracle is delegated to it.
pub struct EndRing {
    pub module: Arc<FPModule>,
    scalar: bool,
    gens: Vec<HomElem>,
    elements: OnceLock<Result<Vec<HomElem>, RingError>>,
    jacobson: OnceLock<Result<HashSet<HomElem>, RingError>>,
    inverses: RwLock<HashMap<Mat, Option<HomElem>>>,
}

impl std::fmt::Debug for EndRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "End({:?})", self.module)
    }
}

impl EndRing {
    pub fn new(module: Arc<FPModule>) -> crate::Result<Self> {
        let gens = hom_group(&module, &module)?.homs;
        let scalar = module.is_rank_one_free();
        if !module.base.is_finite() && !scalar {
            return Err(crate::Error::Unsupported(
                "endomorphism rings over infinite bases need a rank-one free module".into(),
            ));
        }
        Ok(EndRing {
            module,
            scalar,
            gens,
            elements: OnceLock::new(),
            jacobson: OnceLock::new(),
            inverses: RwLock::new(HashMap::new()),
        })
    }

    pub fn base(&self) -> &crate::rings::RingSpec {
        &self.module.base
    }

    pub fn is_scalar(&self) -> bool {
        self.scalar
    }

    pub fn to_scalar(&self, h: &HomElem) -> Value {
        debug_assert!(self.scalar);
        h.mat.get(0, 0).clone()
    }

    pub fn from_scalar(&self, v: &Value) -> HomElem {
        HomElem::identity(Arc::clone(&self.module)).scale(v)
    }

    fn commutes_with_all(&self, u: &HomElem) -> bool {
        self.gens.iter().all(|g| g.compose(u) == u.compose(g))
    }

    fn jacobson_set(&self) -> Result<&HashSet<HomElem>, RingError> {
        self.jacobson
            .get_or_init(|| {
                let all = self.elements()?;
                let one = self.one();
                Ok(all
                    .iter()
                    .filter(|x| {
                        all.iter()
                            .all(|a| self.is_unit(&self.add(&one, &self.mul(a, x))))
                    })
                    .cloned()
                    .collect())
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

impl Ring for EndRing {
    type Elem = HomElem;

    fn zero(&self) -> HomElem {
        HomElem::zero(Arc::clone(&self.module), Arc::clone(&self.module))
    }

    fn one(&self) -> HomElem {
        HomElem::identity(Arc::clone(&self.module))
    }

    fn add(&self, a: &HomElem, b: &HomElem) -> HomElem {
        a.add(b)
    }

    fn neg(&self, a: &HomElem) -> HomElem {
        a.neg()
    }

    fn mul(&self, a: &HomElem, b: &HomElem) -> HomElem {
        a.compose(b)
    }

    fn try_inverse(&self, a: &HomElem) -> Option<HomElem> {
        if self.scalar {
            return self
                .base()
                .try_inverse(&self.to_scalar(a))
                .map(|v| self.from_scalar(&v));
        }
        if let Some(hit) = self.inverses.read().unwrap().get(&a.mat) {
            return hit.clone();
        }
        let inv = inverse(a).ok().flatten();
        self.inverses
            .write()
            .unwrap()
            .insert(a.mat.clone(), inv.clone());
        inv
    }

    fn is_finite(&self) -> bool {
        self.base().is_finite()
    }

    fn is_commutative(&self) -> bool {
        self.scalar
            || self
                .gens
                .iter()
                .all(|g| self.gens.iter().all(|h| g.compose(h) == h.compose(g)))
    }

    fn elements(&self) -> Result<Vec<HomElem>, RingError> {
        self.elements
            .get_or_init(|| {
                if self.scalar {
                    Ok(self
                        .base()
                        .elements()?
                        .iter()
                        .map(|v| self.from_scalar(v))
                        .collect())
                } else {
                    hom_elements(&self.module, &self.module, MAX_ENUMERATION).map_err(|e| match e {
                        crate::Error::Ring(r) => r,
                        other => RingError::Unsupported(other.to_string()),
                    })
                }
            })
            .clone()
    }

    fn units(&self) -> Result<Vec<HomElem>, RingError> {
        if self.scalar {
            return Ok(self
                .base()
                .units()?
                .iter()
                .map(|v| self.from_scalar(v))
                .collect());
        }
        Ok(self
            .elements()?
            .into_iter()
            .filter(|x| self.is_unit(x))
            .collect())
    }

    fn central_units(&self) -> Result<Vec<HomElem>, RingError> {
        if self.scalar {
            return Ok(self
                .base()
                .central_units()?
                .iter()
                .map(|v| self.from_scalar(v))
                .collect());
        }
        Ok(self
            .units()?
            .into_iter()
            .filter(|u| self.commutes_with_all(u))
            .collect())
    }

    fn is_central_unit(&self, s: &HomElem) -> Result<bool, RingError> {
        Ok(self.is_unit(s) && self.commutes_with_all(s))
    }

    fn in_jacobson(&self, x: &HomElem) -> Result<bool, RingError> {
        if self.scalar {
            return self.base().in_jacobson(&self.to_scalar(x));
        }
        Ok(self.jacobson_set()?.contains(x))
    }

    fn unit_regular_mod_jacobson(&self, a: &HomElem) -> Result<Option<HomElem>, RingError> {
        if self.scalar {
            return Ok(self
                .base()
                .unit_regular_mod_jacobson(&self.to_scalar(a))?
                .map(|v| self.from_scalar(&v)));
        }
        if let Some(u) = self.unit_regular_witness(a)? {
            return Ok(Some(u));
        }
        for u in self.units()? {
            if self.in_jacobson(&self.sub(a, &self.mul3(a, &u, a)))? {
                return Ok(Some(u));
            }
        }
        Ok(None)
    }

    fn right_unimodular_witness(
        &self,
        a: &HomElem,
        b: &HomElem,
    ) -> Result<Option<(HomElem, HomElem)>, RingError> {
        if self.scalar {
            let w = self
                .base()
                .right_unimodular_witness(&self.to_scalar(a), &self.to_scalar(b))?;
            return Ok(w.map(|(x, y)| (self.from_scalar(&x), self.from_scalar(&y))));
        }
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

    fn left_unimodular_witness(
        &self,
        a: &HomElem,
        b: &HomElem,
    ) -> Result<Option<(HomElem, HomElem)>, RingError> {
        if self.scalar {
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

    fn sr1_pair_witness(&self, a: &HomElem, b: &HomElem, side: Side) -> Result<HomElem, RingError> {
        if self.scalar {
            return self
                .base()
                .sr1_pair_witness(&self.to_scalar(a), &self.to_scalar(b), side)
                .map(|v| self.from_scalar(&v));
        }
        if self.is_unit(a) {
            return Ok(self.zero());
        }
        for d in self.elements()? {
            let shifted = match side {
                Side::Right => self.add(a, &self.mul(b, &d)),
                Side::Left => self.add(a, &self.mul(&d, b)),
            };
            if self.is_unit(&shifted) {
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
