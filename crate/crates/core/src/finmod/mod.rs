//! Finitely presented modules over the commutative principal-ideal backends,
//! homomorphisms between them, and split-surjection detection.
//!
//! Every module is stored together with a diagonalized presentation
//! `S/(d_1) + ... + S/(d_k)` (units dropped, `0` meaning a free summand).
//! Homomorphisms are kept as matrices in these canonical coordinates, acting
//! on column vectors, with entry `(i, j)` reduced modulo `d_i` of the target.

mod endring;
mod iso;
mod local;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use endring::EndRing;
pub use iso::iso_oracle;
pub use local::{glue, localize_hom, localize_module, spec_view, LocalModule, SpecPoint, SpecView};

use crate::error::{Error, Result};
use crate::linalg::{diagonalize, solve, Mat};
use crate::rings::{Ring, RingError, RingSpec, Value};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FPModule {
    pub base: RingSpec,
    pub gens: usize,
    /// Nonzero relation rows, `gens` columns.
    pub rels: Mat,
    /// Normalized non-unit invariant factors.
    pub invariants: Vec<Value>,
    /// `k x gens`: original generator coordinates to canonical coordinates.
    pub to_canon: Mat,
    /// `gens x k`: canonical coordinates to original generator coordinates.
    pub from_canon: Mat,
}

impl fmt::Debug for FPModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FPModule[{}](", self.base.short_name())?;
        for (i, d) in self.invariants.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if self.base.is_zero(d) {
                write!(f, "S")?;
            } else {
                write!(f, "S/{d}")?;
            }
        }
        write!(f, ")")
    }
}

impl FPModule {
    pub fn new(base: RingSpec, gens: usize, rels: Mat) -> Result<Self> {
        if !base.is_pir() {
            return Err(Error::Unsupported(format!(
                "modules over {}",
                base.short_name()
            )));
        }
        if rels.cols != gens {
            return Err(Error::Shape(format!(
                "relations have {} columns but there are {gens} generators",
                rels.cols
            )));
        }
        for x in &rels.data {
            base.validate(x)?;
        }
        let keep: Vec<usize> = (0..rels.rows)
            .filter(|&i| rels.row(i).iter().any(|x| !base.is_zero(x)))
            .collect();
        let rels = rels.select_rows(&keep);
        let d = diagonalize(&base, &rels)?;
        let mut invariants = Vec::new();
        let mut kept = Vec::new();
        for t in 0..gens {
            let dt = d.diag.get(t).cloned().unwrap_or_else(|| base.zero());
            if !base.is_unit(&dt) {
                invariants.push(dt);
                kept.push(t);
            }
        }
        let to_canon = Mat::from_fn(kept.len(), gens, |k, g| d.v.get(g, kept[k]).clone());
        let from_canon = Mat::from_fn(gens, kept.len(), |g, k| d.v_inv.get(kept[k], g).clone());
        Ok(FPModule {
            base,
            gens,
            rels,
            invariants,
            to_canon,
            from_canon,
        })
    }

    /// `S/(d_1) + ... + S/(d_k)` with the given generators as canonical basis.
    pub fn from_invariants(base: RingSpec, ds: &[Value]) -> Result<Self> {
        if !base.is_pir() {
            return Err(Error::Unsupported(format!(
                "modules over {}",
                base.short_name()
            )));
        }
        let gens = ds.len();
        let mut rows = Vec::new();
        let mut invariants = Vec::new();
        let mut kept = Vec::new();
        for (i, d) in ds.iter().enumerate() {
            base.validate(d)?;
            let (g, _) = base.normalize(d)?;
            if !base.is_zero(&g) {
                let mut row = vec![base.zero(); gens];
                row[i] = g.clone();
                rows.push(row);
            }
            if !base.is_unit(&g) {
                invariants.push(g);
                kept.push(i);
            }
        }
        let rels = Mat::from_rows(rows, gens);
        let to_canon = Mat::from_fn(kept.len(), gens, |k, g| {
            if g == kept[k] { base.one() } else { base.zero() }
        });
        Ok(FPModule {
            base,
            gens,
            rels,
            invariants,
            from_canon: to_canon.transpose(),
            to_canon,
        })
    }

    pub fn free(base: RingSpec, rank: usize) -> Result<Self> {
        let zero = base.zero();
        Self::from_invariants(base, &vec![zero; rank])
    }

    pub fn zero(base: RingSpec) -> Result<Self> {
        Self::from_invariants(base, &[])
    }

    /// Block-diagonal direct sum. Canonical coordinates are concatenated.
    pub fn direct_sum(parts: &[&FPModule]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Shape("empty direct sum".into()));
        };
        let base = first.base.clone();
        if parts.iter().any(|p| p.base != base) {
            return Err(RingError::MixedRings.into());
        }
        let rels: Vec<&Mat> = parts.iter().map(|p| &p.rels).collect();
        let to: Vec<&Mat> = parts.iter().map(|p| &p.to_canon).collect();
        let from: Vec<&Mat> = parts.iter().map(|p| &p.from_canon).collect();
        Ok(FPModule {
            gens: parts.iter().map(|p| p.gens).sum(),
            rels: Mat::block_diag(&base, &rels),
            invariants: parts.iter().flat_map(|p| p.invariants.clone()).collect(),
            to_canon: Mat::block_diag(&base, &to),
            from_canon: Mat::block_diag(&base, &from),
            base,
        })
    }

    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Self::zero(self.base.clone());
        }
        Self::direct_sum(&vec![self; n])
    }

    /// Number of canonical coordinates.
    pub fn k(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_zero(&self) -> bool {
        self.invariants.is_empty()
    }

    /// True iff the module is free of rank one.
    pub fn is_rank_one_free(&self) -> bool {
        self.k() == 1 && self.base.is_zero(&self.invariants[0])
    }

    pub fn is_free(&self) -> bool {
        self.invariants.iter().all(|d| self.base.is_zero(d))
    }

    /// Number of elements, for finite modules.
    pub fn cardinality(&self) -> Option<u128> {
        self.invariants
            .iter()
            .try_fold(1u128, |acc, d| Some(acc * residue_count(&self.base, d)? as u128))
    }

    /// Canonical representative of a coordinate vector.
    pub fn reduce(&self, v: &[Value]) -> Vec<Value> {
        v.iter()
            .zip(&self.invariants)
            .map(|(x, d)| self.base.reduce_mod(x, d))
            .collect()
    }
}

/// `|S/(d)|`, or `None` if infinite.
pub fn residue_count(base: &RingSpec, d: &Value) -> Option<u64> {
    match (base, d) {
        (RingSpec::IntegersModN(n), Value::Res(r)) => Some(if *r == 0 { *n } else { *r }),
        (RingSpec::FiniteField(f), _) => Some(if base.is_zero(d) { f.q } else { 1 }),
        (RingSpec::Integers, Value::Int(x)) => {
            use num_traits::{Signed, ToPrimitive, Zero};
            if x.is_zero() {
                None
            } else {
                x.abs().to_u64()
            }
        }
        (RingSpec::LocalizedIntegers(0), _) => {
            if base.is_zero(d) {
                None
            } else {
                Some(1)
            }
        }
        (RingSpec::LocalizedIntegers(_), Value::Rat(r)) => {
            use num_traits::{ToPrimitive, Zero};
            if r.is_zero() {
                None
            } else {
                r.numer().to_u64()
            }
        }
        _ => None,
    }
}

/// Canonical representatives of the multiples of `g` in `S/(d)`, in
/// increasing order of the multiplier.
pub fn multiples(base: &RingSpec, g: &Value, d: &Value) -> Result<Vec<Value>, RingError> {
    match (base, g) {
        (RingSpec::IntegersModN(n), Value::Res(gv)) => {
            let dd = match d {
                Value::Res(0) => *n,
                Value::Res(x) => *x,
                _ => unreachable!(),
            };
            let g = gv % dd;
            if g == 0 {
                return Ok(vec![Value::Res(0)]);
            }
            let step = num_integer::gcd(g, dd);
            Ok((0..dd / step).map(|t| Value::Res(t * step)).collect())
        }
        (RingSpec::FiniteField(_), _) => {
            if base.is_zero(g) || !base.is_zero(d) {
                Ok(vec![base.zero()])
            } else {
                base.elements()
            }
        }
        _ => Err(RingError::InfiniteRing),
    }
}

/// A homomorphism between finitely presented modules, stored in canonical
/// coordinates.
#[derive(Clone)]
pub struct HomElem {
    pub from: Arc<FPModule>,
    pub to: Arc<FPModule>,
    pub mat: Mat,
}

fn same_module(a: &Arc<FPModule>, b: &Arc<FPModule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PartialEq for HomElem {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat && same_module(&self.from, &other.from) && same_module(&self.to, &other.to)
    }
}

impl Eq for HomElem {}

impl Hash for HomElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.mat.hash(state);
    }
}

impl fmt::Debug for HomElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.mat)
    }
}

impl HomElem {
    /// Builds a map from a matrix on the original generators
    /// (`gens(to) x gens(from)`), rejecting maps that do not respect relations.
    pub fn new(from: Arc<FPModule>, to: Arc<FPModule>, user: Mat) -> Result<Self> {
        if from.base != to.base {
            return Err(RingError::MixedRings.into());
        }
        if user.rows != to.gens || user.cols != from.gens {
            return Err(Error::Shape(format!(
                "map matrix is {}x{}, expected {}x{}",
                user.rows, user.cols, to.gens, from.gens
            )));
        }
        let base = &from.base;
        for x in &user.data {
            base.validate(x)?;
        }
        let image_of_rels = to.to_canon.mul(base, &user).mul(base, &from.rels.transpose());
        for j in 0..image_of_rels.cols {
            let col = image_of_rels.col(j);
            if to.reduce(&col).iter().any(|x| !base.is_zero(x)) {
                return Err(Error::IllDefined(format!(
                    "relation {} of the source does not map into the relations of the target",
                    j + 1
                )));
            }
        }
        let mat = to.to_canon.mul(base, &user).mul(base, &from.from_canon);
        Ok(Self::from_canonical(from, to, mat))
    }

    /// Wraps a canonical-coordinate matrix, reducing entries. The caller
    /// guarantees well-definedness.
    pub fn from_canonical(from: Arc<FPModule>, to: Arc<FPModule>, mut mat: Mat) -> Self {
        debug_assert_eq!((mat.rows, mat.cols), (to.k(), from.k()));
        for i in 0..mat.rows {
            for j in 0..mat.cols {
                let v = to.base.reduce_mod(mat.get(i, j), &to.invariants[i]);
                mat.set(i, j, v);
            }
        }
        HomElem { from, to, mat }
    }

    /// Checked variant of [`HomElem::from_canonical`].
    pub fn from_canonical_checked(from: Arc<FPModule>, to: Arc<FPModule>, mat: Mat) -> Result<Self> {
        if (mat.rows, mat.cols) != (to.k(), from.k()) {
            return Err(Error::Shape("canonical matrix has the wrong shape".into()));
        }
        let base = &from.base;
        for i in 0..mat.rows {
            for j in 0..mat.cols {
                let image = base.mul(mat.get(i, j), &from.invariants[j]);
                if !base.is_zero(&base.reduce_mod(&image, &to.invariants[i])) {
                    return Err(Error::IllDefined(format!("entry ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(Self::from_canonical(from, to, mat))
    }

    pub fn zero(from: Arc<FPModule>, to: Arc<FPModule>) -> Self {
        let mat = Mat::zeros(&from.base, to.k(), from.k());
        HomElem { from, to, mat }
    }

    pub fn identity(m: Arc<FPModule>) -> Self {
        let mat = Mat::identity(&m.base, m.k());
        HomElem::from_canonical(Arc::clone(&m), m, mat)
    }

    pub fn base(&self) -> &RingSpec {
        &self.from.base
    }

    /// Matrix on the original generators of source and target.
    pub fn user_matrix(&self) -> Mat {
        let b = self.base();
        self.to.from_canon.mul(b, &self.mat).mul(b, &self.from.to_canon)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero(self.base())
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &HomElem) -> HomElem {
        assert!(
            same_module(&f.to, &self.from),
            "composition of maps with mismatched endpoints"
        );
        let mat = self.mat.mul(self.base(), &f.mat);
        HomElem::from_canonical(Arc::clone(&f.from), Arc::clone(&self.to), mat)
    }

    pub fn add(&self, other: &HomElem) -> HomElem {
        assert!(same_module(&self.from, &other.from) && same_module(&self.to, &other.to));
        let mat = self.mat.add(self.base(), &other.mat);
        HomElem::from_canonical(Arc::clone(&self.from), Arc::clone(&self.to), mat)
    }

    pub fn neg(&self) -> HomElem {
        let mat = self.mat.neg(self.base());
        HomElem::from_canonical(Arc::clone(&self.from), Arc::clone(&self.to), mat)
    }

    pub fn sub(&self, other: &HomElem) -> HomElem {
        self.add(&other.neg())
    }

    /// Multiplication by a scalar of the base ring.
    pub fn scale(&self, s: &Value) -> HomElem {
        let b = self.base();
        let mat = Mat {
            rows: self.mat.rows,
            cols: self.mat.cols,
            data: self.mat.data.iter().map(|x| b.mul(s, x)).collect(),
        };
        HomElem::from_canonical(Arc::clone(&self.from), Arc::clone(&self.to), mat)
    }

    /// The column map `(f_1, ..., f_n)^T : M -> N_1 + ... + N_n`.
    pub fn column(fs: &[HomElem]) -> Result<HomElem> {
        let first = fs.first().ok_or_else(|| Error::Shape("empty column".into()))?;
        if fs.iter().any(|f| !same_module(&f.from, &first.from)) {
            return Err(Error::Shape("column entries have different sources".into()));
        }
        let tos: Vec<&FPModule> = fs.iter().map(|f| &*f.to).collect();
        let to = Arc::new(FPModule::direct_sum(&tos)?);
        let mats: Vec<&Mat> = fs.iter().map(|f| &f.mat).collect();
        Ok(HomElem {
            from: Arc::clone(&first.from),
            to,
            mat: Mat::vstack(&mats),
        })
    }

    /// The row map `(g_1, ..., g_n) : M_1 + ... + M_n -> N`.
    pub fn row(gs: &[HomElem]) -> Result<HomElem> {
        let first = gs.first().ok_or_else(|| Error::Shape("empty row".into()))?;
        if gs.iter().any(|g| !same_module(&g.to, &first.to)) {
            return Err(Error::Shape("row entries have different targets".into()));
        }
        let froms: Vec<&FPModule> = gs.iter().map(|g| &*g.from).collect();
        let from = Arc::new(FPModule::direct_sum(&froms)?);
        let mats: Vec<&Mat> = gs.iter().map(|g| &g.mat).collect();
        Ok(HomElem {
            from,
            to: Arc::clone(&first.to),
            mat: Mat::hstack(&mats),
        })
    }

    /// Block map between direct sums: `blocks[i][j] : cols[j] -> rows[i]`.
    pub fn block(
        blocks: &[Vec<HomElem>],
        from: Arc<FPModule>,
        to: Arc<FPModule>,
    ) -> HomElem {
        let row_mats: Vec<Mat> = blocks
            .iter()
            .map(|r| Mat::hstack(&r.iter().map(|h| &h.mat).collect::<Vec<_>>()))
            .collect();
        let mat = Mat::vstack(&row_mats.iter().collect::<Vec<_>>());
        HomElem::from_canonical(from, to, mat)
    }

    /// Extracts block `(i, j)` of a map between direct sums with the given
    /// summand lists.
    pub fn sub_block(
        &self,
        row_parts: &[Arc<FPModule>],
        col_parts: &[Arc<FPModule>],
        i: usize,
        j: usize,
    ) -> HomElem {
        let r0: usize = row_parts[..i].iter().map(|p| p.k()).sum();
        let c0: usize = col_parts[..j].iter().map(|p| p.k()).sum();
        let mat = self
            .mat
            .block(r0, r0 + row_parts[i].k(), c0, c0 + col_parts[j].k());
        HomElem::from_canonical(Arc::clone(&col_parts[j]), Arc::clone(&row_parts[i]), mat)
    }

    /// Same map with source and target replaced by equal modules.
    pub fn retarget(&self, from: Arc<FPModule>, to: Arc<FPModule>) -> HomElem {
        assert_eq!(from.invariants, self.from.invariants);
        assert_eq!(to.invariants, self.to.invariants);
        HomElem {
            from,
            to,
            mat: self.mat.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = self.user_matrix();
        serde_json::Value::Array(
            (0..m.rows)
                .map(|i| serde_json::Value::Array(m.row(i).iter().map(Value::to_json).collect()))
                .collect(),
        )
    }
}

/// Some `h : P -> M` with `f ∘ h = g`, where `f : M -> N` and `g : P -> N`.
pub fn lift(f: &HomElem, g: &HomElem) -> Result<Option<HomElem>> {
    if !same_module(&f.to, &g.to) {
        return Err(Error::Shape("lift: maps have different targets".into()));
    }
    let base = f.base();
    let (m, n, p) = (&f.from, &f.to, &g.from);
    let (km, kn) = (m.k(), n.k());
    let mut h = Mat::zeros(base, km, p.k());
    for j in 0..p.k() {
        let gens: Vec<Value> = (0..km)
            .map(|i| base.ann_generator(&p.invariants[j], &m.invariants[i]))
            .collect();
        let a = Mat::from_fn(kn, km + kn, |l, c| {
            if c < km {
                base.mul(f.mat.get(l, c), &gens[c])
            } else if c - km == l {
                n.invariants[l].clone()
            } else {
                base.zero()
            }
        });
        let Some(x) = solve(base, &a, &g.mat.col(j))? else {
            return Ok(None);
        };
        for i in 0..km {
            h.set(i, j, base.mul(&gens[i], &x[i]));
        }
    }
    let h = HomElem::from_canonical(Arc::clone(p), Arc::clone(m), h);
    if f.compose(&h) != *g {
        return Err(Error::VerificationFailure("lift does not compose correctly".into()));
    }
    Ok(Some(h))
}

/// A section `g` with `f ∘ g = 1`, if `f` is a split surjection.
pub fn split_section(f: &HomElem) -> Result<Option<HomElem>> {
    lift(f, &HomElem::identity(Arc::clone(&f.to)))
}

/// Two-sided inverse of an isomorphism, if it is one.
pub fn inverse(f: &HomElem) -> Result<Option<HomElem>> {
    let Some(g) = split_section(f)? else {
        return Ok(None);
    };
    if g.compose(f) == HomElem::identity(Arc::clone(&f.from)) {
        Ok(Some(g))
    } else {
        Ok(None)
    }
}

/// Generators of a left `E`-submodule of `Hom(M, N)`.
#[derive(Clone, Debug)]
pub struct HomGenSet {
    pub from: Arc<FPModule>,
    pub to: Arc<FPModule>,
    pub homs: Vec<HomElem>,
    pub cached_mu: Option<usize>,
}

impl HomGenSet {
    pub fn new(from: Arc<FPModule>, to: Arc<FPModule>, homs: Vec<HomElem>) -> Result<Self> {
        if homs
            .iter()
            .any(|h| !same_module(&h.from, &from) || !same_module(&h.to, &to))
        {
            return Err(Error::Shape("generators do not share endpoints".into()));
        }
        Ok(HomGenSet {
            from,
            to,
            homs,
            cached_mu: None,
        })
    }
}

/// Elementary generators `g * E_ij` of `Hom(M, N)` as an `S`-module.
pub fn hom_group(m: &Arc<FPModule>, n: &Arc<FPModule>) -> Result<HomGenSet> {
    if m.base != n.base {
        return Err(RingError::MixedRings.into());
    }
    let base = &m.base;
    let mut homs = Vec::new();
    for i in 0..n.k() {
        for j in 0..m.k() {
            let g = base.ann_generator(&m.invariants[j], &n.invariants[i]);
            let g = base.reduce_mod(&g, &n.invariants[i]);
            if base.is_zero(&g) {
                continue;
            }
            let mut mat = Mat::zeros(base, n.k(), m.k());
            mat.set(i, j, g);
            homs.push(HomElem::from_canonical(Arc::clone(m), Arc::clone(n), mat));
        }
    }
    HomGenSet::new(Arc::clone(m), Arc::clone(n), homs)
}

/// All elements of `Hom(M, N)` for finite backends, entries enumerated with the
/// first entry varying fastest.
pub fn hom_elements(m: &Arc<FPModule>, n: &Arc<FPModule>, cap: u64) -> Result<Vec<HomElem>> {
    let base = &m.base;
    let (rows, cols) = (n.k(), m.k());
    let mut choices = Vec::with_capacity(rows * cols);
    let mut total: u64 = 1;
    for i in 0..rows {
        for j in 0..cols {
            let g = base.ann_generator(&m.invariants[j], &n.invariants[i]);
            let c = multiples(base, &g, &n.invariants[i])?;
            total = total.saturating_mul(c.len() as u64);
            choices.push(c);
        }
    }
    if total > cap {
        return Err(RingError::TooLarge(total).into());
    }
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let data = choices
            .iter()
            .map(|c| {
                let v = c[(idx % c.len() as u64) as usize].clone();
                idx /= c.len() as u64;
                v
            })
            .collect();
        out.push(HomElem {
            from: Arc::clone(m),
            to: Arc::clone(n),
            mat: Mat { rows, cols, data },
        });
    }
    Ok(out)
}

/// A uniformly random element of `Hom(M, N)` for finite backends.
pub fn random_hom<G: rand::Rng>(m: &Arc<FPModule>, n: &Arc<FPModule>, rng: &mut G) -> Result<HomElem> {
    let base = &m.base;
    let (rows, cols) = (n.k(), m.k());
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let g = base.ann_generator(&m.invariants[j], &n.invariants[i]);
            let c = multiples(base, &g, &n.invariants[i])?;
            data.push(c[rng.gen_range(0..c.len())].clone());
        }
    }
    Ok(HomElem {
        from: Arc::clone(m),
        to: Arc::clone(n),
        mat: Mat { rows, cols, data },
    })
}

/// Applies a matrix over `E` (entries in `Hom(N, N)`) to a column of maps
/// `M -> N`: `(A g)_i = sum_j a_ij ∘ g_j`.
pub fn apply_matrix(a: &[Vec<HomElem>], g: &[HomElem]) -> Vec<HomElem> {
    a.iter()
        .map(|row| {
            let mut acc = HomElem::zero(Arc::clone(&g[0].from), Arc::clone(&g[0].to));
            for (aij, gj) in row.iter().zip(g) {
                acc = acc.add(&aij.compose(gj));
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::RingSpec;

    fn zm(n: u64) -> RingSpec {
        RingSpec::zmod(n).unwrap()
    }

    fn cyclic(n: u64, d: u64) -> Arc<FPModule> {
        Arc::new(FPModule::from_invariants(zm(n), &[Value::Res(d)]).unwrap())
    }

    fn int(x: i64) -> Value {
        Value::Int(x.into())
    }

    #[test]
    fn hom_z2_to_z4() {
        let (m, n) = (cyclic(4, 2), cyclic(4, 0));
        let hs = hom_group(&m, &n).unwrap();
        assert_eq!(hs.homs.len(), 1);
        assert_eq!(hs.homs[0].mat.data, vec![Value::Res(2)]);
        let all = hom_elements(&m, &n, 100).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn hom_free_integer() {
        let z = RingSpec::Integers;
        let m = Arc::new(FPModule::free(z.clone(), 2).unwrap());
        let n = Arc::new(FPModule::free(z, 1).unwrap());
        let hs = hom_group(&m, &n).unwrap();
        assert_eq!(hs.homs.len(), 2);
        assert_eq!(hs.homs[0].mat.data, vec![int(1), int(0)]);
        assert_eq!(hs.homs[1].mat.data, vec![int(0), int(1)]);
        let zero = Arc::new(FPModule::zero(zm(6)).unwrap());
        assert!(hom_group(&zero, &cyclic(6, 0)).unwrap().homs.is_empty());
    }

    #[test]
    fn split_examples() {
        let s = zm(6);
        let m = Arc::new(FPModule::free(s.clone(), 2).unwrap());
        let n = Arc::new(FPModule::free(s.clone(), 1).unwrap());
        let proj = HomElem::new(
            Arc::clone(&m),
            Arc::clone(&n),
            Mat::from_rows(vec![vec![Value::Res(1), Value::Res(0)]], 2),
        )
        .unwrap();
        let g = split_section(&proj).unwrap().unwrap();
        assert_eq!(proj.compose(&g), HomElem::identity(n));

        let z4 = cyclic(4, 0);
        let z2 = cyclic(4, 2);
        let red = HomElem::new(z4, z2, Mat::from_rows(vec![vec![Value::Res(1)]], 1)).unwrap();
        assert!(split_section(&red).unwrap().is_none());

        let z = RingSpec::Integers;
        let m = Arc::new(FPModule::free(z.clone(), 2).unwrap());
        let n = Arc::new(FPModule::free(z, 1).unwrap());
        let f = HomElem::new(m, Arc::clone(&n), Mat::from_rows(vec![vec![int(2), int(3)]], 2)).unwrap();
        let g = split_section(&f).unwrap().unwrap();
        assert_eq!(f.compose(&g), HomElem::identity(n));
    }

    #[test]
    fn ill_defined_maps_rejected() {
        // Z/2 -> Z/4 sending 1 to 1 does not respect 2*1 = 0
        let r = HomElem::new(cyclic(4, 2), cyclic(4, 0), Mat::from_rows(vec![vec![Value::Res(1)]], 1));
        assert!(matches!(r, Err(Error::IllDefined(_))));
    }

    #[test]
    fn direct_sum_shapes() {
        let s = zm(4);
        let a = FPModule::from_invariants(s.clone(), &[Value::Res(2)]).unwrap();
        let b = FPModule::free(s.clone(), 1).unwrap();
        let sum = FPModule::direct_sum(&[&a, &b]).unwrap();
        assert_eq!(sum.gens, 2);
        assert_eq!(sum.rels, Mat::from_rows(vec![vec![Value::Res(2), Value::Res(0)]], 2));
        let n = Arc::new(b);
        let id = HomElem::identity(Arc::clone(&n));
        let col = HomElem::column(&[id.clone(), id.clone()]).unwrap();
        assert_eq!(col.mat.data, vec![Value::Res(1), Value::Res(1)]);
        let row = HomElem::row(&[id.clone(), id.scale(&Value::Res(3))]).unwrap();
        let comp = row.compose(&col);
        assert_eq!(comp.mat.data, vec![Value::Res(0)]);
    }

    #[test]
    fn presentation_cardinality_matches_invariants() {
        let s = zm(12);
        let rels = Mat::from_rows(
            vec![vec![Value::Res(4), Value::Res(6)], vec![Value::Res(2), Value::Res(8)]],
            2,
        );
        let m = FPModule::new(s, 2, rels).unwrap();
        // brute force: count residues of (Z/12)^2 modulo the row span
        let mut span = std::collections::HashSet::new();
        for a in 0..12u64 {
            for b in 0..12u64 {
                span.insert(((4 * a + 2 * b) % 12, (6 * a + 8 * b) % 12));
            }
        }
        assert_eq!(m.cardinality(), Some(144 / span.len() as u128));
    }
}
