//! The δ invariant of a family of maps, its localizations, the closed sets
//! `Y_m = {p : δ(F_p) <= m}`, and the finite set of test points.
//!
//! Supported backends: finite `Z/n` and `GF(q)` (every point is maximal and
//! the spectrum is finite), and the integers when `N` is free of rank one.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::finmod::{
    apply_matrix, localize_hom, localize_module, spec_view, split_section, EndRing, FPModule,
    HomElem, HomGenSet, SpecPoint, SpecView,
};
use crate::linalg::{diagonalize, snf, Mat};
use crate::rings::gf::factorize;
use crate::rings::{Ring, RingSpec, Value};

/// Default bound on the size of enumerated families.
pub const DEFAULT_CAP: usize = 20_000;

/// A value of δ: a nonnegative integer or infinity (the latter exactly when
/// the target module vanishes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Delta {
    Finite(usize),
    Infinite,
}

impl Delta {
    pub fn at_least(self, m: usize) -> bool {
        self >= Delta::Finite(m)
    }

    pub fn to_json(self) -> serde_json::Value {
        match self {
            Delta::Finite(k) => json!(k),
            Delta::Infinite => json!("infinity"),
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Finite(k) => write!(f, "{k}"),
            Delta::Infinite => write!(f, "infinity"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMethod {
    /// Exhaustive search for split surjections among combinations.
    Exhaustive,
    /// Rank of the generator matrix over the residue field (valid when the
    /// localized target is free of rank one).
    MinorRank,
}

impl DeltaMethod {
    pub fn name(self) -> &'static str {
        match self {
            DeltaMethod::Exhaustive => "exhaustive",
            DeltaMethod::MinorRank => "minorRank",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub global: Delta,
    pub locals: Vec<(SpecPoint, Delta)>,
    pub method: DeltaMethod,
}

impl DeltaReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "global": self.global.to_json(),
            "locals": self.locals.iter().map(|(p, d)| json!({"point": p.to_string(), "delta": d.to_json()})).collect::<Vec<_>>(),
            "method": self.method.name(),
        })
    }
}

/// The family localized at a point.
struct LocalFamily {
    m: Arc<FPModule>,
    n: Arc<FPModule>,
    gens: Vec<HomElem>,
}

fn localize_family(f: &HomGenSet, p: &SpecPoint) -> Result<LocalFamily> {
    let lm = localize_module(&f.from, p)?;
    let ln = localize_module(&f.to, p)?;
    let gens = f.homs.iter().map(|h| localize_hom(h, &lm, &ln)).collect();
    Ok(LocalFamily {
        m: lm.module,
        n: ln.module,
        gens,
    })
}

fn is_finite_backend(base: &RingSpec) -> bool {
    matches!(base, RingSpec::IntegersModN(_) | RingSpec::FiniteField(_))
}

fn require_supported(f: &HomGenSet) -> Result<()> {
    let base = &f.to.base;
    if is_finite_backend(base) || (*base == RingSpec::Integers && f.to.is_rank_one_free()) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "δ over {} for this target module",
            base.short_name()
        )))
    }
}

/// Residue field of a local ring and the reduction map.
pub(crate) fn residue(local: &RingSpec, x: &Value) -> Result<(RingSpec, Value)> {
    match (local, x) {
        (RingSpec::IntegersModN(q), Value::Res(r)) => {
            let p = factorize(*q)[0].0;
            Ok((RingSpec::IntegersModN(p), Value::Res(r % p)))
        }
        (RingSpec::FiniteField(_), _) | (RingSpec::LocalizedIntegers(0), _) => {
            Ok((local.clone(), x.clone()))
        }
        (RingSpec::LocalizedIntegers(p), Value::Rat(r)) => {
            let field = RingSpec::IntegersModN(*p);
            let pm = BigInt::from(*p);
            let num = r.numer().mod_floor(&pm).to_u64().unwrap_or(0);
            let den = r.denom().mod_floor(&pm).to_u64().unwrap_or(0);
            let inv = field
                .try_inverse(&Value::Res(den))
                .ok_or_else(|| Error::Unsupported("element is not local".into()))?;
            Ok((field.clone(), field.mul(&Value::Res(num), &inv)))
        }
        _ => Err(Error::Unsupported(format!("residue field of {}", local.short_name()))),
    }
}

pub(crate) fn rank_over(field: &RingSpec, rows: usize, cols: usize, data: Vec<Value>) -> Result<usize> {
    if rows == 0 || cols == 0 {
        return Ok(0);
    }
    let a = Mat { rows, cols, data };
    let d = diagonalize(field, &a)?;
    Ok(d.diag.iter().filter(|x| !field.is_zero(x)).count())
}

/// δ at a point by the residue-field rank of the generator matrix; requires
/// the localized target to be free of rank one.
pub fn delta_local_rank(f: &HomGenSet, p: &SpecPoint) -> Result<Delta> {
    let lf = localize_family(f, p)?;
    if lf.n.is_zero() {
        return Ok(Delta::Infinite);
    }
    if !lf.n.is_rank_one_free() {
        return Err(Error::Unsupported(
            "rank computation needs a localized target free of rank one".into(),
        ));
    }
    let local = &lf.n.base;
    let cols = lf.m.k();
    let mut field = None;
    let mut data = Vec::with_capacity(lf.gens.len() * cols);
    for g in &lf.gens {
        for j in 0..cols {
            let (fld, v) = residue(local, g.mat.get(0, j))?;
            field = Some(fld);
            data.push(v);
        }
    }
    match field {
        None => Ok(Delta::Finite(0)),
        Some(fld) => Ok(Delta::Finite(rank_over(&fld, lf.gens.len(), cols, data)?)),
    }
}

/// The left `E`-span of `gens`, by closure under addition and left
/// multiplication; elements in discovery order.
pub fn e_span(e: &EndRing, gens: &[HomElem], zero: HomElem, cap: usize) -> Result<Vec<HomElem>> {
    let ends = e.elements()?;
    let mut seen: HashSet<HomElem> = HashSet::new();
    let mut out = vec![zero.clone()];
    seen.insert(zero);
    let mut i = 0;
    let mut push = |x: HomElem, out: &mut Vec<HomElem>| -> Result<()> {
        if seen.insert(x.clone()) {
            out.push(x);
            if out.len() > cap {
                return Err(Error::CapExceeded { lower_bound: cap });
            }
        }
        Ok(())
    };
    for g in gens {
        push(g.clone(), &mut out)?;
    }
    while i < out.len() {
        let x = out[i].clone();
        for g in gens {
            push(x.add(g), &mut out)?;
        }
        for a in &ends {
            push(a.compose(&x), &mut out)?;
        }
        i += 1;
    }
    Ok(out)
}

fn column_splits(col: &[HomElem]) -> Result<bool> {
    Ok(split_section(&HomElem::column(col)?)?.is_some())
}

/// Largest `m` such that some `m` members of `elems` form a split column,
/// searched over increasing index sequences with split prefixes.
fn max_split_depth(elems: &[HomElem], bound: usize, cap: usize) -> Result<usize> {
    fn go(
        elems: &[HomElem],
        start: usize,
        prefix: &mut Vec<HomElem>,
        best: &mut usize,
        bound: usize,
    ) -> Result<()> {
        if *best >= bound {
            return Ok(());
        }
        for i in start..elems.len() {
            prefix.push(elems[i].clone());
            if column_splits(prefix)? {
                *best = (*best).max(prefix.len());
                go(elems, i + 1, prefix, best, bound)?;
            }
            prefix.pop();
            if *best >= bound {
                break;
            }
        }
        Ok(())
    }
    let mut best = 0;
    let limit = bound.min(cap);
    go(elems, 0, &mut Vec::new(), &mut best, limit)?;
    if best >= cap && cap < bound {
        return Err(Error::CapExceeded { lower_bound: best });
    }
    Ok(best)
}

/// Coefficient rows `W` (an `m x n` matrix over `E`) such that `W g` is a
/// split column, searched over the left `E`-span of `g`. `None` when no such
/// rows exist.
pub fn split_rows(
    e: &EndRing,
    g: &[HomElem],
    m: usize,
    cap: usize,
) -> Result<Option<Vec<Vec<HomElem>>>> {
    let Some(first) = g.first() else {
        return Ok(None);
    };
    let n = g.len();
    let ends = e.elements()?;
    let e_zero = e.zero();
    let e_one = e.one();
    let zero = HomElem::zero(Arc::clone(&first.from), Arc::clone(&first.to));
    let mut seen: HashSet<HomElem> = HashSet::new();
    let mut span: Vec<(HomElem, Vec<HomElem>)> = Vec::new();
    let mut push = |x: HomElem, c: Vec<HomElem>, span: &mut Vec<(HomElem, Vec<HomElem>)>| {
        if seen.insert(x.clone()) {
            span.push((x, c));
        }
    };
    push(zero, vec![e_zero.clone(); n], &mut span);
    for (i, gi) in g.iter().enumerate() {
        let mut c = vec![e_zero.clone(); n];
        c[i] = e_one.clone();
        push(gi.clone(), c, &mut span);
    }
    let mut i = 0;
    while i < span.len() {
        let (x, c) = span[i].clone();
        for (j, gj) in g.iter().enumerate() {
            let mut c2 = c.clone();
            c2[j] = c2[j].add(&e_one);
            push(x.add(gj), c2, &mut span);
        }
        for a in &ends {
            push(a.compose(&x), c.iter().map(|cj| a.compose(cj)).collect(), &mut span);
        }
        if span.len() > cap {
            return Err(Error::CapExceeded { lower_bound: cap });
        }
        i += 1;
    }
    let nonzero: Vec<&(HomElem, Vec<HomElem>)> = span.iter().filter(|(x, _)| !x.is_zero()).collect();
    fn go(
        elems: &[&(HomElem, Vec<HomElem>)],
        start: usize,
        picked: &mut Vec<usize>,
        m: usize,
    ) -> Result<bool> {
        if picked.len() == m {
            return Ok(true);
        }
        for i in start..elems.len() {
            picked.push(i);
            let col: Vec<HomElem> = picked.iter().map(|&k| elems[k].0.clone()).collect();
            if column_splits(&col)? && go(elems, i + 1, picked, m)? {
                return Ok(true);
            }
            picked.pop();
        }
        Ok(false)
    }
    let mut picked = Vec::new();
    if m == 0 || !go(&nonzero, 0, &mut picked, m)? {
        return Ok((m == 0).then(Vec::new));
    }
    Ok(Some(picked.iter().map(|&k| nonzero[k].1.clone()).collect()))
}

/// δ at a point by exhaustive search over the localized family (finite
/// backends only). `cap` bounds the reported value.
pub fn delta_local_exhaustive(f: &HomGenSet, p: &SpecPoint, cap: usize) -> Result<Delta> {
    if !is_finite_backend(&f.to.base) {
        return Err(Error::Unsupported("exhaustive δ over an infinite base".into()));
    }
    let lf = localize_family(f, p)?;
    if lf.n.is_zero() {
        return Ok(Delta::Infinite);
    }
    let e = EndRing::new(Arc::clone(&lf.n))?;
    let zero = HomElem::zero(Arc::clone(&lf.m), Arc::clone(&lf.n));
    let span = e_span(&e, &lf.gens, zero, DEFAULT_CAP)?;
    let nonzero: Vec<HomElem> = span.into_iter().filter(|h| !h.is_zero()).collect();
    // δ never exceeds the number of generators when N_p is nonzero.
    Ok(Delta::Finite(max_split_depth(&nonzero, lf.gens.len(), cap)?))
}

/// δ of `F_p`, by residue rank when the localized target is free of rank one
/// and by exhaustive search otherwise.
pub fn delta_local(f: &HomGenSet, p: &SpecPoint, cap: usize) -> Result<(Delta, DeltaMethod)> {
    require_supported(f)?;
    let view = spec_view(&f.to)?;
    let ln = localize_module(&f.to, p);
    let in_x = view.contains(p);
    match ln {
        Err(e) => Err(e),
        Ok(ln) if !in_x || ln.module.is_zero() => Ok((Delta::Infinite, DeltaMethod::MinorRank)),
        Ok(ln) if ln.module.is_rank_one_free() => Ok((delta_local_rank(f, p)?, DeltaMethod::MinorRank)),
        Ok(_) => Ok((delta_local_exhaustive(f, p, cap)?, DeltaMethod::Exhaustive)),
    }
}

/// Invariant factors of the integer generator matrix (rows = generators).
pub(crate) fn integer_invariants(f: &HomGenSet) -> Result<Vec<BigInt>> {
    let cols = f.from.k();
    let rows = f.homs.len();
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let a = Mat::from_fn(rows, cols, |i, j| f.homs[i].mat.get(0, j).clone());
    let r = snf(&a)?;
    Ok((0..rows.min(cols))
        .map(|i| match r.d.get(i, i) {
            Value::Int(x) => x.abs(),
            _ => BigInt::zero(),
        })
        .collect())
}

/// Product of the first `j` invariant factors: the gcd of the `j x j` minors.
pub(crate) fn minor_gcd(inv: &[BigInt], j: usize) -> BigInt {
    if j == 0 {
        return BigInt::one();
    }
    if j > inv.len() {
        return BigInt::zero();
    }
    inv[..j].iter().product()
}

/// δ of `F` itself.
pub fn delta_global(f: &HomGenSet, cap: usize) -> Result<Delta> {
    require_supported(f)?;
    if f.to.is_zero() {
        return Ok(Delta::Infinite);
    }
    if f.to.base == RingSpec::Integers {
        let units = integer_invariants(f)?.iter().filter(|x| x.is_one()).count();
        return Ok(Delta::Finite(units));
    }
    // Over a finite ring a column splits exactly when it splits at every
    // local factor.
    let view = spec_view(&f.to)?;
    let mut best = Delta::Infinite;
    for p in &view.points {
        best = best.min(delta_local(f, p, cap)?.0);
    }
    Ok(best)
}

/// The full report: global δ and δ at the test points.
pub fn delta_report(f: &HomGenSet, cap: usize) -> Result<DeltaReport> {
    let global = delta_global(f, cap)?;
    let tp = test_points(f, cap)?;
    let method = if f.to.base == RingSpec::Integers {
        DeltaMethod::MinorRank
    } else {
        let mut m = DeltaMethod::MinorRank;
        for (p, _) in &tp.points {
            if delta_local(f, p, cap)?.1 == DeltaMethod::Exhaustive {
                m = DeltaMethod::Exhaustive;
            }
        }
        m
    };
    Ok(DeltaReport {
        global,
        locals: tp.points,
        method,
    })
}

/// Minimal number of generators of `F` as a left `E`-module, by exhaustive
/// search over subsets of `F` (finite backends).
pub fn mu_e(f: &HomGenSet, cap: usize) -> Result<usize> {
    if !is_finite_backend(&f.to.base) {
        return Err(Error::Unsupported("μ over an infinite base".into()));
    }
    let e = EndRing::new(Arc::clone(&f.to))?;
    let zero = HomElem::zero(Arc::clone(&f.from), Arc::clone(&f.to));
    let span = e_span(&e, &f.homs, zero.clone(), cap)?;
    let target = span.len();
    let elems: Vec<HomElem> = span.into_iter().filter(|h| !h.is_zero()).collect();
    if elems.is_empty() {
        return Ok(0);
    }
    fn search(
        e: &EndRing,
        elems: &[HomElem],
        zero: &HomElem,
        t: usize,
        start: usize,
        chosen: &mut Vec<HomElem>,
        target: usize,
        cap: usize,
    ) -> Result<bool> {
        if chosen.len() == t {
            return Ok(e_span(e, chosen, zero.clone(), cap)?.len() == target);
        }
        for i in start..elems.len() {
            chosen.push(elems[i].clone());
            let hit = search(e, elems, zero, t, i + 1, chosen, target, cap)?;
            chosen.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
    for t in 1..=f.homs.len() {
        if search(&e, &elems, &zero, t, 0, &mut Vec::new(), target, cap)? {
            return Ok(t);
        }
    }
    Ok(f.homs.len())
}

/// Whether the column `f` is `q`-split: `δ(F_q) >= min(n, 1 + dim_X(q))`.
pub fn q_split_check(f: &HomGenSet, q: &SpecPoint) -> Result<bool> {
    let need = f.homs.len().min(1 + q.dim_in_x as usize);
    match delta_local(f, q, need.max(1)) {
        Ok((d, _)) => Ok(d.at_least(need)),
        Err(Error::CapExceeded { lower_bound }) => Ok(lower_bound >= need),
        Err(e) => Err(e),
    }
}

pub fn w_split_check(f: &HomGenSet, w: &[SpecPoint]) -> Result<bool> {
    for q in w {
        if !q_split_check(f, q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the column is split at every point of `X`. Over the integers the
/// infinitely many maximal ideals are covered at once: δ at every maximal
/// ideal is at least `t` exactly when the gcd of the `t x t` minors is one.
pub fn x_split_check(f: &HomGenSet) -> Result<bool> {
    require_supported(f)?;
    let view = spec_view(&f.to)?;
    if f.to.base == RingSpec::Integers {
        let n = f.homs.len();
        let inv = integer_invariants(f)?;
        let rank = inv.iter().filter(|x| !x.is_zero()).count();
        let closed_ok = minor_gcd(&inv, n.min(1)).is_one();
        return Ok(closed_ok && rank >= n.min(2));
    }
    w_split_check(f, &view.points)
}

/// The closed set `Y_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedSet {
    /// An explicit finite list of points.
    Points(Vec<SpecPoint>),
    /// `V(g)` inside `Spec(Z)`: primes dividing `g`, and everything when
    /// `g = 0`.
    Vanishing(BigInt),
}

impl ClosedSet {
    pub fn contains(&self, p: &SpecPoint) -> bool {
        match self {
            ClosedSet::Points(ps) => ps.iter().any(|q| q.prime == p.prime),
            ClosedSet::Vanishing(g) => {
                g.is_zero() || (p.prime != 0 && (g % BigInt::from(p.prime)).is_zero())
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ClosedSet::Points(ps) => json!(ps.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
            ClosedSet::Vanishing(g) => json!({"vanishing": g.to_string()}),
        }
    }
}

pub fn closed_ym(f: &HomGenSet, m: usize) -> Result<ClosedSet> {
    require_supported(f)?;
    if f.to.base == RingSpec::Integers {
        let inv = integer_invariants(f)?;
        return Ok(ClosedSet::Vanishing(minor_gcd(&inv, m + 1)));
    }
    let view = spec_view(&f.to)?;
    let mut pts = Vec::new();
    for p in &view.points {
        if !delta_local(f, p, usize::MAX)?.0.at_least(m + 1) {
            pts.push(*p);
        }
    }
    Ok(ClosedSet::Points(pts))
}

/// The test points, listed so that no point contains an earlier one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestPointSet {
    pub points: Vec<(SpecPoint, Delta)>,
}

impl TestPointSet {
    pub fn point_list(&self) -> Vec<SpecPoint> {
        self.points.iter().map(|(p, _)| *p).collect()
    }

    /// No listed point contains a point listed before it.
    pub fn is_induction_ordered(&self) -> bool {
        self.points.iter().enumerate().all(|(i, (p, _))| {
            self.points[..i]
                .iter()
                .all(|(q, _)| q == p || !p.contains(q))
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .points
            .iter()
            .map(|(p, d)| json!({"point": p.to_string(), "delta": d.to_json()}))
            .collect::<Vec<_>>())
    }
}

/// The union of the minimal points of the sets `Y_m`, ordered with maximal
/// ideals first (by prime) and the zero ideal last.
pub fn test_points(f: &HomGenSet, cap: usize) -> Result<TestPointSet> {
    require_supported(f)?;
    let view: SpecView = spec_view(&f.to)?;
    let mut points: Vec<SpecPoint> = if f.to.base == RingSpec::Integers {
        let inv = integer_invariants(f)?;
        let rank = inv.iter().filter(|x| !x.is_zero()).count();
        let g = minor_gcd(&inv, rank);
        let mut primes: Vec<SpecPoint> = if g.is_zero() {
            Vec::new()
        } else {
            let g: u64 = g
                .to_u64()
                .ok_or_else(|| Error::Unsupported("minor gcd exceeds 64 bits".into()))?;
            factorize(g).into_iter().map(|(p, _)| SpecPoint::maximal(p)).collect()
        };
        primes.push(SpecPoint {
            prime: 0,
            dim_in_x: 1,
        });
        primes
    } else {
        // Every point of a finite spectrum is closed, hence minimal in any
        // closed set containing it.
        view.points.clone()
    };
    points.sort_by_key(|p| (p.prime == 0, p.prime));
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        out.push((p, delta_local(f, &p, cap)?.0));
    }
    Ok(TestPointSet { points: out })
}

/// Given an `X`-split column `f` and `U` invertible over `E`, with the first
/// `n - 1` entries of `U f` split at every test point of `F`, confirms they
/// are split on all of `X`.
pub fn reduction_check(f: &[HomElem], u: &[Vec<HomElem>], cap: usize) -> Result<bool> {
    let n = f.len();
    if n < 2 || u.len() != n || u.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("reduction_check needs n >= 2 and U of size n".into()));
    }
    let (m, nn) = (Arc::clone(&f[0].from), Arc::clone(&f[0].to));
    let fam = HomGenSet::new(Arc::clone(&m), Arc::clone(&nn), f.to_vec())?;
    if !x_split_check(&fam)? {
        return Err(Error::PreconditionUnverified("f is not X-split".into()));
    }
    let p = apply_matrix(u, f);
    let head = HomGenSet::new(m, nn, p[..n - 1].to_vec())?;
    let lambda = test_points(&fam, cap)?;
    if !w_split_check(&head, &lambda.point_list())? {
        return Err(Error::PreconditionUnverified(
            "truncated column is not split at the test points".into(),
        ));
    }
    x_split_check(&head)
}
