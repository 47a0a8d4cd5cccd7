//! Cancellation: the main-lemma reduction of an `X`-split column and the
//! engine that turns an isomorphism `K + L ≅ K + M` into an explicit
//! `L ≅ M`, plus hypothesis checkers for the two corollary settings.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;

use crate::delta::{
    delta_local, integer_invariants, minor_gcd, rank_over, residue, split_rows, test_points,
    w_split_check, x_split_check, Delta,
};
use crate::elim::{df_lift, rows_procedure, ElimMatrix, SplitContext};
use crate::error::{Error, Result};
use crate::finmod::{
    glue, hom_elements, hom_group, inverse, localize_hom, localize_module, spec_view,
    split_section, FPModule, HomElem, HomGenSet, LocalModule, SpecPoint,
};
use crate::linalg::Mat;
use crate::rings::gf::factorize;
use crate::rings::{RingSpec, Value};

/// Bound on enumerations performed by searches in this module.
pub const SEARCH_CAP: u64 = 200_000;

#[derive(Clone, Debug)]
pub struct TranscriptEntry {
    pub step: String,
    pub detail: serde_json::Value,
}

impl TranscriptEntry {
    fn new(step: &str, detail: serde_json::Value) -> Self {
        TranscriptEntry {
            step: step.to_string(),
            detail,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"step": self.step, "detail": self.detail})
    }
}

/// `K` as a summand of `N^m`: `projection ∘ inclusion = 1_K`.
#[derive(Clone, Debug)]
pub struct SummandWitness {
    pub inclusion: HomElem,
    pub projection: HomElem,
    pub copies: usize,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub k: Arc<FPModule>,
    pub l: Arc<FPModule>,
    pub m: Arc<FPModule>,
    pub n: Arc<FPModule>,
    /// An isomorphism `K + L -> K + M`.
    pub iso: HomElem,
    /// Generators of `F` inside `Hom(M, N)`.
    pub f: HomGenSet,
    pub summand: Option<SummandWitness>,
}

impl Scenario {
    pub fn new(
        k: Arc<FPModule>,
        l: Arc<FPModule>,
        m: Arc<FPModule>,
        n: Arc<FPModule>,
        iso: HomElem,
        f: HomGenSet,
        summand: Option<SummandWitness>,
    ) -> Result<Self> {
        let kl = FPModule::direct_sum(&[&k, &l])?;
        let km = FPModule::direct_sum(&[&k, &m])?;
        if iso.from.invariants != kl.invariants || iso.to.invariants != km.invariants {
            return Err(Error::Shape("iso must map K + L to K + M".into()));
        }
        if f.from.invariants != m.invariants || f.to.invariants != n.invariants {
            return Err(Error::Shape("F must lie in Hom(M, N)".into()));
        }
        if inverse(&iso)?.is_none() {
            return Err(Error::HypothesisFailure("iso is not invertible".into()));
        }
        let iso = iso.retarget(Arc::new(kl), Arc::new(km));
        let f = HomGenSet::new(
            Arc::clone(&m),
            Arc::clone(&n),
            f.homs
                .iter()
                .map(|h| h.retarget(Arc::clone(&m), Arc::clone(&n)))
                .collect(),
        )?;
        Ok(Scenario {
            k,
            l,
            m,
            n,
            iso,
            f,
            summand,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CancellationResult {
    /// `L -> M`.
    pub iso_lm: HomElem,
    /// `M -> L`.
    pub inverse: HomElem,
    pub transcript: Vec<TranscriptEntry>,
}

impl CancellationResult {
    /// Re-checks both compositions exactly.
    pub fn verify(&self) -> bool {
        self.inverse.compose(&self.iso_lm) == HomElem::identity(Arc::clone(&self.iso_lm.from))
            && self.iso_lm.compose(&self.inverse)
                == HomElem::identity(Arc::clone(&self.iso_lm.to))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "isoLM": self.iso_lm.to_json(),
            "inverse": self.inverse.to_json(),
            "transcript": self.transcript.iter().map(TranscriptEntry::to_json).collect::<Vec<_>>(),
            "verified": self.verify(),
        })
    }
}

/// Output of one application of the main lemma.
#[derive(Clone, Debug)]
pub struct MainLemmaStep {
    pub d: Vec<HomElem>,
    /// `(f_1 + e d_1 f_n, f_2 + d_2 f_n, ..., f_(n-1) + d_(n-1) f_n)`.
    pub column: Vec<HomElem>,
    pub transcript: Vec<TranscriptEntry>,
}

fn shortened(f: &[HomElem], e: &HomElem, d: &[HomElem]) -> Vec<HomElem> {
    let last = &f[f.len() - 1];
    (0..f.len() - 1)
        .map(|i| {
            let t = d[i].compose(last);
            if i == 0 {
                f[0].add(&e.compose(&t))
            } else {
                f[i].add(&t)
            }
        })
        .collect()
}

fn pair_splits(e: &HomElem, h: &HomElem) -> Result<bool> {
    Ok(split_section(&HomElem::row(&[e.clone(), h.clone()])?)?.is_some())
}

fn family(col: &[HomElem]) -> Result<HomGenSet> {
    HomGenSet::new(Arc::clone(&col[0].from), Arc::clone(&col[0].to), col.to_vec())
}

/// Rows selecting `m` maps that are independent over the residue field
/// (rank-one free target) or found by span search otherwise.
fn local_witness_rows(ctx: &SplitContext, g: &[HomElem], m: usize) -> Result<ElimMatrix> {
    let n = g.len();
    let rows: Vec<Vec<HomElem>> = if ctx.n.is_rank_one_free() {
        let cols = ctx.m.k();
        let mut picked: Vec<usize> = Vec::new();
        let mut data: Vec<Value> = Vec::new();
        let mut field = None;
        for (i, gi) in g.iter().enumerate() {
            if picked.len() == m {
                break;
            }
            let mut trial = data.clone();
            for j in 0..cols {
                let (fld, v) = residue(&ctx.base, gi.mat.get(0, j))?;
                field = Some(fld);
                trial.push(v);
            }
            let fld = field.as_ref().expect("field set above");
            if rank_over(fld, picked.len() + 1, cols, trial.clone())? == picked.len() + 1 {
                picked.push(i);
                data = trial;
            }
        }
        if picked.len() < m {
            return Err(Error::VerificationFailure(format!(
                "residue rank below δ = {m}"
            )));
        }
        picked
            .iter()
            .map(|&p| {
                (0..n)
                    .map(|j| if j == p { ctx.e_one() } else { ctx.e_zero() })
                    .collect()
            })
            .collect()
    } else {
        split_rows(&ctx.e, g, m, SEARCH_CAP as usize)?.ok_or_else(|| {
            Error::VerificationFailure(format!("no {m} split combinations although δ >= {m}"))
        })?
    };
    let w = ElimMatrix { entries: rows };
    if ctx.section(&w.apply(ctx, g))?.is_none() {
        return Err(Error::VerificationFailure("witness rows do not split".into()));
    }
    Ok(w)
}

/// How local elements `c s` return to `E`, and which `s` the chooser replies.
enum Globalizer {
    /// Finite backends: the CRT idempotent of the point is the element of
    /// `J \ q`, and it localizes to `1`.
    Finite,
    /// `N = Z`: `r = J * den(c)` with `J` the product of the predecessor
    /// primes, so that `c r^2` is an integer multiple of `J`.
    Integers { j: BigInt },
}

fn rat_of(v: &Value) -> BigRational {
    match v {
        Value::Rat(r) => r.clone(),
        Value::Int(k) => BigRational::from_integer(k.clone()),
        _ => BigRational::zero(),
    }
}

impl Globalizer {
    fn reply(&self, ctx: &SplitContext, c: &HomElem) -> HomElem {
        match self {
            Globalizer::Finite => ctx.e_one(),
            Globalizer::Integers { j } => {
                let den = rat_of(c.mat.get(0, 0)).denom().clone();
                let r = BigRational::from_integer(j * den);
                ctx.e.from_scalar(&Value::Rat(&r * &r))
            }
        }
    }

    fn lift(&self, n: &Arc<FPModule>, ln: &LocalModule, x: &HomElem) -> Result<HomElem> {
        match self {
            Globalizer::Finite => glue(n, n, &[(ln.clone(), ln.clone(), x.clone())]),
            Globalizer::Integers { .. } => {
                let v = rat_of(x.mat.get(0, 0));
                if !v.is_integer() {
                    return Err(Error::VerificationFailure(
                        "chooser failed to clear a denominator".into(),
                    ));
                }
                let mat = Mat::from_fn(1, 1, |_, _| Value::Int(v.to_integer()));
                HomElem::from_canonical_checked(Arc::clone(n), Arc::clone(n), mat)
            }
        }
    }
}

fn globalizer(base: &RingSpec, preds: &[SpecPoint]) -> Result<Globalizer> {
    match base {
        RingSpec::IntegersModN(_) | RingSpec::FiniteField(_) => Ok(Globalizer::Finite),
        RingSpec::Integers => {
            let j = preds
                .iter()
                .filter(|p| p.prime != 0)
                .fold(BigInt::one(), |acc, p| acc * BigInt::from(p.prime));
            Ok(Globalizer::Integers { j })
        }
        other => Err(Error::Unsupported(format!("main lemma over {}", other.short_name()))),
    }
}

/// Finds `d_1, ..., d_(n-1)` in `E` making the shortened column `X`-split,
/// by walking the test points in induction order and running the rows
/// protocol at each one.
pub fn main_lemma_step(f: &[HomElem], e: &HomElem, cap: usize) -> Result<MainLemmaStep> {
    let n = f.len();
    if n < 2 {
        return Err(Error::Shape("main lemma needs a column of length >= 2".into()));
    }
    let (mm, nn) = (Arc::clone(&f[0].from), Arc::clone(&f[0].to));
    let fam = family(f)?;
    if !x_split_check(&fam)? {
        return Err(Error::HypothesisFailure("column is not X-split".into()));
    }
    if !pair_splits(e, &f[0])? {
        return Err(Error::HypothesisFailure("(e, f_1) is not split surjective".into()));
    }
    let lambda = test_points(&fam, cap)?;
    if !lambda.is_induction_ordered() {
        return Err(Error::VerificationFailure("test points are not induction ordered".into()));
    }
    let mut d: Vec<HomElem> = vec![HomElem::zero(Arc::clone(&nn), Arc::clone(&nn)); n - 1];
    let mut preds: Vec<SpecPoint> = Vec::new();
    let mut transcript = Vec::new();
    for &(q, dq) in &lambda.points {
        let m = match dq {
            Delta::Infinite => {
                return Err(Error::HypothesisFailure(format!(
                    "δ is infinite at {q}, contrary to {q} lying in the support of N"
                )))
            }
            Delta::Finite(m) => m,
        };
        if m >= n {
            transcript.push(TranscriptEntry::new(
                "test-point",
                json!({"point": q.to_string(), "delta": m, "action": "already split"}),
            ));
            preds.push(q);
            continue;
        }
        let mut g = shortened(f, e, &d);
        g.push(f[n - 1].clone());
        let lm = localize_module(&mm, &q)?;
        let ln = localize_module(&nn, &q)?;
        let ctx = SplitContext::new(Arc::clone(&lm.module), Arc::clone(&ln.module))?;
        let gq: Vec<HomElem> = g.iter().map(|h| localize_hom(h, &lm, &ln)).collect();
        let eq = localize_hom(e, &ln, &ln);
        let witness = local_witness_rows(&ctx, &gq, m)?;
        let glob = globalizer(&nn.base, &preds)?;
        let outcome = rows_procedure(&ctx, &gq, &witness, &eq, &mut |_, c| glob.reply(&ctx, c))?;
        let mut incs = Vec::with_capacity(m);
        for i in 0..m {
            let cs = outcome.c[i].compose(&outcome.s[i]);
            let inc = glob.lift(&nn, &ln, &cs)?;
            d[i] = d[i].add(&inc);
            incs.push(inc.to_json());
        }
        let col = shortened(f, e, &d);
        let mut checked = preds.clone();
        checked.push(q);
        if !w_split_check(&family(&col)?, &checked)? {
            return Err(Error::VerificationFailure(format!(
                "shortened column lost splitness at or before {q}"
            )));
        }
        transcript.push(TranscriptEntry::new(
            "test-point",
            json!({
                "point": q.to_string(),
                "delta": m,
                "c": outcome.c.iter().map(HomElem::to_json).collect::<Vec<_>>(),
                "s": outcome.s.iter().map(HomElem::to_json).collect::<Vec<_>>(),
                "increments": incs,
                "certificate": outcome.certificate.to_json(),
            }),
        ));
        preds.push(q);
    }
    let column = shortened(f, e, &d);
    let fam_new = family(&column)?;
    if !w_split_check(&fam_new, &lambda.point_list())? || !x_split_check(&fam_new)? {
        return Err(Error::VerificationFailure("shortened column is not X-split".into()));
    }
    if !pair_splits(e, &column[0])? {
        return Err(Error::VerificationFailure("(e, h_1) is not split surjective".into()));
    }
    Ok(MainLemmaStep {
        d,
        column,
        transcript,
    })
}

/// The first failing point of `δ(F_p) >= 1 + dim_X(p)`, if any.
pub fn condition_three(f: &HomGenSet) -> Result<Option<SpecPoint>> {
    if f.to.base == RingSpec::Integers {
        if !f.to.is_rank_one_free() || !f.from.is_free() {
            return Err(Error::Unsupported("over Z only free M and N = Z are supported".into()));
        }
        let inv = integer_invariants(f)?;
        let g1 = minor_gcd(&inv, 1);
        if !g1.is_one() {
            let p = if g1.is_zero() {
                2
            } else {
                let g: u64 = g1.to_u64().ok_or_else(|| {
                    Error::Unsupported("minor gcd exceeds 64 bits".into())
                })?;
                factorize(g)[0].0
            };
            return Ok(Some(SpecPoint::maximal(p)));
        }
        let rank = inv.iter().filter(|x| !x.is_zero()).count();
        let generic = SpecPoint {
            prime: 0,
            dim_in_x: 1,
        };
        return Ok((rank < 2).then_some(generic));
    }
    for p in spec_view(&f.to)?.points {
        let need = 1 + p.dim_in_x as usize;
        let ok = match delta_local(f, &p, need) {
            Ok((d, _)) => d.at_least(need),
            Err(Error::CapExceeded { lower_bound }) => lower_bound >= need,
            Err(e) => return Err(e),
        };
        if !ok {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

fn block2(
    a: [[&HomElem; 2]; 2],
    from: &Arc<FPModule>,
    to: &Arc<FPModule>,
) -> HomElem {
    HomElem::block(
        &[
            vec![a[0][0].clone(), a[0][1].clone()],
            vec![a[1][0].clone(), a[1][1].clone()],
        ],
        Arc::clone(from),
        Arc::clone(to),
    )
}

/// A section of the `X`-split map `h`: local sections glued and passed
/// through the Dedekind-finite lift over finite backends, a direct split
/// over the integers.
fn global_section(h: &HomElem) -> Result<HomElem> {
    let (m, n) = (&h.from, &h.to);
    let none = || Error::VerificationFailure("X-split map is not split surjective".into());
    if m.base == RingSpec::Integers {
        return split_section(h)?.ok_or_else(none);
    }
    let mut locals = Vec::new();
    for p in spec_view(n)?.points {
        let lm = localize_module(m, &p)?;
        let ln = localize_module(n, &p)?;
        let hp = localize_hom(h, &lm, &ln);
        let sp = split_section(&hp)?.ok_or_else(none)?;
        locals.push((ln, lm, sp));
    }
    let g0 = glue(n, m, &locals)?;
    let ctx = SplitContext::new(Arc::clone(m), Arc::clone(n))?;
    df_lift(&ctx, h, &ctx.e_one(), &g0)
}

/// The engine for `K = N`: from `phi : N + L -> N + M` returns `L -> M` and
/// its inverse.
fn cancel_once(
    phi: &HomElem,
    n: &Arc<FPModule>,
    l: &Arc<FPModule>,
    m: &Arc<FPModule>,
    f: &HomGenSet,
    cap: usize,
    transcript: &mut Vec<TranscriptEntry>,
) -> Result<(HomElem, HomElem)> {
    let nl = Arc::new(FPModule::direct_sum(&[n, l])?);
    let nm = Arc::new(FPModule::direct_sum(&[n, m])?);
    let phi = phi.retarget(Arc::clone(&nl), Arc::clone(&nm));
    let psi = inverse(&phi)?
        .ok_or_else(|| Error::HypothesisFailure("iso is not invertible".into()))?;
    let (pl, pm) = ([Arc::clone(n), Arc::clone(l)], [Arc::clone(n), Arc::clone(m)]);
    let e = psi.sub_block(&pl, &pm, 0, 0);
    let f1 = psi.sub_block(&pl, &pm, 0, 1);
    if f.homs.is_empty() {
        return Err(Error::HypothesisFailure("condition (3): F has no generators".into()));
    }
    let mut col = vec![f1.clone()];
    col.extend(f.homs.iter().map(|h| h.retarget(Arc::clone(m), Arc::clone(n))));
    let mut f0 = HomElem::zero(Arc::clone(m), Arc::clone(n));
    while col.len() >= 2 {
        let last = col[col.len() - 1].clone();
        let step = main_lemma_step(&col, &e, cap)?;
        f0 = f0.add(&step.d[0].compose(&last));
        transcript.push(TranscriptEntry::new(
            "main-lemma",
            json!({
                "n": col.len(),
                "d": step.d.iter().map(HomElem::to_json).collect::<Vec<_>>(),
                "points": step.transcript.iter().map(TranscriptEntry::to_json).collect::<Vec<_>>(),
            }),
        ));
        col = step.column;
    }
    let h = f1.add(&e.compose(&f0));
    if h != col[0] {
        return Err(Error::VerificationFailure("accumulated f_0 disagrees with the column".into()));
    }
    let g = global_section(&h)?;
    let (one_n, one_m) = (HomElem::identity(Arc::clone(n)), HomElem::identity(Arc::clone(m)));
    let z_mn = HomElem::zero(Arc::clone(m), Arc::clone(n));
    let z_nm = HomElem::zero(Arc::clone(n), Arc::clone(m));
    let y = g.sub(&g.compose(&e));
    let v1 = block2([[&one_n, &f0], [&z_nm, &one_m]], &nm, &nm);
    let v2 = block2([[&one_n, &z_mn], [&y, &one_m]], &nm, &nm);
    let v3 = block2([[&one_n, &h.neg()], [&z_nm, &one_m]], &nm, &nm);
    let v1i = block2([[&one_n, &f0.neg()], [&z_nm, &one_m]], &nm, &nm);
    let v2i = block2([[&one_n, &z_mn], [&y.neg(), &one_m]], &nm, &nm);
    let v3i = block2([[&one_n, &h], [&z_nm, &one_m]], &nm, &nm);
    let u = v1.compose(&v2).compose(&v3);
    let u_inv = v3i.compose(&v2i).compose(&v1i);
    if u.compose(&u_inv) != HomElem::identity(Arc::clone(&nm)) {
        return Err(Error::VerificationFailure("U and its inverse disagree".into()));
    }
    let t = psi.compose(&u);
    if t.sub_block(&pl, &pm, 0, 0) != one_n || !t.sub_block(&pl, &pm, 0, 1).is_zero() {
        return Err(Error::VerificationFailure("first row of psi U is not (1, 0)".into()));
    }
    // Five-Lemma step: clear the first column, then read off the corner.
    let c = t.sub_block(&pl, &pm, 1, 0);
    let one_l = HomElem::identity(Arc::clone(l));
    let z_ln = HomElem::zero(Arc::clone(l), Arc::clone(n));
    let clear = block2([[&one_n, &z_ln], [&c.neg(), &one_l]], &nl, &nl);
    let diag = clear.compose(&t);
    if !diag.sub_block(&pl, &pm, 1, 0).is_zero() {
        return Err(Error::VerificationFailure("column clearing failed".into()));
    }
    let ml = diag.sub_block(&pl, &pm, 1, 1);
    let lm = u_inv.compose(&phi).sub_block(&pm, &pl, 1, 1);
    if ml.compose(&lm) != one_l || lm.compose(&ml) != one_m {
        return Err(Error::VerificationFailure("extracted blocks are not inverse".into()));
    }
    transcript.push(TranscriptEntry::new(
        "five-lemma",
        json!({
            "e": e.to_json(),
            "f1": f1.to_json(),
            "f0": f0.to_json(),
            "section": g.to_json(),
            "U": u.to_json(),
        }),
    ));
    Ok((lm, ml))
}

/// `N^j + X` for `j >= 0`.
fn with_copies(n: &Arc<FPModule>, j: usize, x: &Arc<FPModule>) -> Result<Arc<FPModule>> {
    if j == 0 {
        return Ok(Arc::clone(x));
    }
    let mut parts: Vec<&FPModule> = vec![n; j];
    parts.push(x);
    Ok(Arc::new(FPModule::direct_sum(&parts)?))
}

/// Constructs and verifies an isomorphism `L -> M`.
pub fn cancel_iso(sc: &Scenario, cap: usize) -> Result<CancellationResult> {
    if let Some(p) = condition_three(&sc.f)? {
        return Err(Error::HypothesisFailure(format!(
            "condition (3): δ(F_p) < 1 + dim_X(p) at p = {p}"
        )));
    }
    let mut transcript = Vec::new();
    let (n, l, m) = (&sc.n, &sc.l, &sc.m);
    // Reduce K to a power of N.
    let (copies, mut cur) = match &sc.summand {
        None => {
            if sc.k.invariants != n.invariants {
                return Err(Error::HypothesisFailure(
                    "K differs from N and no summand witness was given".into(),
                ));
            }
            (1, sc.iso.clone())
        }
        Some(w) => {
            let nj = Arc::new(n.power(w.copies)?);
            let k = &sc.k;
            let (inc, proj) = (
                w.inclusion.retarget(Arc::clone(k), Arc::clone(&nj)),
                w.projection.retarget(Arc::clone(&nj), Arc::clone(k)),
            );
            if proj.compose(&inc) != HomElem::identity(Arc::clone(k)) {
                return Err(Error::HypothesisFailure(
                    "summand witness: projection after inclusion is not 1_K".into(),
                ));
            }
            let q = HomElem::identity(Arc::clone(&nj)).sub(&inc.compose(&proj));
            let (kl, km) = (Arc::clone(&sc.iso.from), Arc::clone(&sc.iso.to));
            let njl = Arc::new(FPModule::direct_sum(&[&nj, l])?);
            let njm = Arc::new(FPModule::direct_sum(&[&nj, m])?);
            let (one_l, one_m) = (HomElem::identity(Arc::clone(l)), HomElem::identity(Arc::clone(m)));
            let down = block2(
                [
                    [&proj, &HomElem::zero(Arc::clone(l), Arc::clone(k))],
                    [&HomElem::zero(Arc::clone(&nj), Arc::clone(l)), &one_l],
                ],
                &njl,
                &kl,
            );
            let up = block2(
                [
                    [&inc, &HomElem::zero(Arc::clone(m), Arc::clone(&nj))],
                    [&HomElem::zero(Arc::clone(k), Arc::clone(m)), &one_m],
                ],
                &km,
                &njm,
            );
            let zl = HomElem::zero(Arc::clone(l), Arc::clone(&nj));
            let q_part = block2(
                [
                    [&q, &zl],
                    [
                        &HomElem::zero(Arc::clone(&nj), Arc::clone(m)),
                        &HomElem::zero(Arc::clone(l), Arc::clone(m)),
                    ],
                ],
                &njl,
                &njm,
            );
            let phi = q_part.add(&up.compose(&sc.iso).compose(&down));
            transcript.push(TranscriptEntry::new(
                "summand-reduction",
                json!({"copies": w.copies, "iso": phi.to_json()}),
            ));
            (w.copies, phi)
        }
    };
    for j in (1..=copies).rev() {
        let lj = with_copies(n, j - 1, l)?;
        let mj = with_copies(n, j - 1, m)?;
        let mut gens = Vec::new();
        let mut parts: Vec<Arc<FPModule>> = vec![Arc::clone(n); j - 1];
        parts.push(Arc::clone(m));
        for i in 0..j - 1 {
            let row: Vec<HomElem> = parts
                .iter()
                .enumerate()
                .map(|(t, p)| {
                    if t == i {
                        HomElem::identity(Arc::clone(n))
                    } else {
                        HomElem::zero(Arc::clone(p), Arc::clone(n))
                    }
                })
                .collect();
            gens.push(HomElem::row(&row)?.retarget(Arc::clone(&mj), Arc::clone(n)));
        }
        for fh in &sc.f.homs {
            let row: Vec<HomElem> = parts
                .iter()
                .enumerate()
                .map(|(t, p)| {
                    if t == j - 1 {
                        fh.clone()
                    } else {
                        HomElem::zero(Arc::clone(p), Arc::clone(n))
                    }
                })
                .collect();
            gens.push(HomElem::row(&row)?.retarget(Arc::clone(&mj), Arc::clone(n)));
        }
        let fj = HomGenSet::new(Arc::clone(&mj), Arc::clone(n), gens)?;
        let (lm, ml) = cancel_once(&cur, n, &lj, &mj, &fj, cap, &mut transcript)?;
        cur = lm;
        if j == 1 {
            let res = CancellationResult {
                iso_lm: cur,
                inverse: ml,
                transcript,
            };
            if !res.verify() {
                return Err(Error::VerificationFailure("final compositions are not identities".into()));
            }
            return Ok(res);
        }
    }
    Err(Error::Shape("summand witness must use at least one copy of N".into()))
}

/// Builds `F` inside `Hom(P, N)` from one split projection `P_m -> N_m` per
/// point of the support, glued by idempotents (finite backends).
pub fn assemble_f(
    p: &Arc<FPModule>,
    n: &Arc<FPModule>,
    witnesses: Option<&[(SpecPoint, HomElem)]>,
) -> Result<HomGenSet> {
    if !matches!(n.base, RingSpec::IntegersModN(_) | RingSpec::FiniteField(_)) {
        return Err(Error::Unsupported(format!(
            "assembling F over {}",
            n.base.short_name()
        )));
    }
    let mut gens = Vec::new();
    for q in spec_view(n)?.points {
        let lp = localize_module(p, &q)?;
        let ln = localize_module(n, &q)?;
        let given = witnesses.and_then(|ws| ws.iter().find(|(w, _)| w.prime == q.prime));
        let proj = match given {
            Some((_, h)) => {
                let h = h.retarget(Arc::clone(&lp.module), Arc::clone(&ln.module));
                if split_section(&h)?.is_none() {
                    return Err(Error::HypothesisFailure(format!(
                        "given projection at {q} is not split surjective"
                    )));
                }
                h
            }
            None => {
                let mut found = None;
                for h in hom_elements(&lp.module, &ln.module, SEARCH_CAP)? {
                    if split_section(&h)?.is_some() {
                        found = Some(h);
                        break;
                    }
                }
                found.ok_or_else(|| {
                    Error::HypothesisFailure(format!("N is not a local summand of P at {q}"))
                })?
            }
        };
        gens.push(glue(p, n, &[(lp, ln, proj)])?);
    }
    let f = HomGenSet::new(Arc::clone(p), Arc::clone(n), gens)?;
    for q in spec_view(n)?.points {
        if !delta_local(&f, &q, 1)?.0.at_least(1) {
            return Err(Error::VerificationFailure(format!("assembled F has δ = 0 at {q}")));
        }
    }
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub condition: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CorollaryReport {
    pub corollary: &'static str,
    pub conditions: Vec<ConditionCheck>,
    pub cancellation: Option<std::result::Result<CancellationResult, Error>>,
}

impl CorollaryReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.condition.as_str())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "corollary": self.corollary,
            "conditions": self.conditions.iter().map(|c| json!({
                "condition": c.condition, "holds": c.holds, "detail": c.detail
            })).collect::<Vec<_>>(),
            "cancellation": match &self.cancellation {
                None => serde_json::Value::Null,
                Some(Ok(r)) => r.to_json(),
                Some(Err(e)) => json!({"error": e.to_string()}),
            },
        })
    }
}

/// Data for the corollary checkers.
#[derive(Clone, Debug)]
pub struct CorollaryData {
    pub k: Arc<FPModule>,
    pub l: Arc<FPModule>,
    pub m: Arc<FPModule>,
    pub n: Arc<FPModule>,
    pub p: Arc<FPModule>,
    /// `K + L -> K + M`.
    pub iso: HomElem,
    /// `P` as a summand of `M`: (inclusion, projection).
    pub p_summand: Option<(HomElem, HomElem)>,
    pub k_summand: Option<SummandWitness>,
}

fn check(condition: &str, holds: bool, detail: impl Into<String>) -> ConditionCheck {
    ConditionCheck {
        condition: condition.to_string(),
        holds,
        detail: detail.into(),
    }
}

fn supported(d: &CorollaryData) -> bool {
    match d.n.base {
        RingSpec::IntegersModN(_) | RingSpec::FiniteField(_) => true,
        RingSpec::Integers => d.n.is_rank_one_free() && d.m.is_free() && d.p.is_free(),
        _ => false,
    }
}

/// The projection `M -> P`, from the witness, equality, or search.
fn p_projection(d: &CorollaryData) -> Result<Option<HomElem>> {
    if let Some((inc, proj)) = &d.p_summand {
        let inc = inc.retarget(Arc::clone(&d.p), Arc::clone(&d.m));
        let proj = proj.retarget(Arc::clone(&d.m), Arc::clone(&d.p));
        return Ok((proj.compose(&inc) == HomElem::identity(Arc::clone(&d.p))).then_some(proj));
    }
    if d.p.invariants == d.m.invariants {
        return Ok(Some(
            HomElem::identity(Arc::clone(&d.m)).retarget(Arc::clone(&d.m), Arc::clone(&d.p)),
        ));
    }
    if d.n.base == RingSpec::Integers {
        return Ok(None);
    }
    for h in hom_elements(&d.m, &d.p, SEARCH_CAP)? {
        if split_section(&h)?.is_some() {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// Whether `N_q^t` is a summand of `P_q`.
fn local_summand(p: &Arc<FPModule>, n: &Arc<FPModule>, q: &SpecPoint, t: usize) -> Result<bool> {
    if n.base == RingSpec::Integers {
        return Ok(p.k() >= t);
    }
    let h = hom_group(p, n)?;
    match delta_local(&h, q, t) {
        Ok((d, _)) => Ok(d.at_least(t)),
        Err(Error::CapExceeded { lower_bound }) => Ok(lower_bound >= t),
        Err(e) => Err(e),
    }
}

fn finish(
    corollary: &'static str,
    d: &CorollaryData,
    conditions: Vec<ConditionCheck>,
    f_on_p: impl FnOnce() -> Result<HomGenSet>,
    proj: Option<HomElem>,
    cap: usize,
) -> CorollaryReport {
    let mut report = CorollaryReport {
        corollary,
        conditions,
        cancellation: None,
    };
    if !report.passed() {
        return report;
    }
    let run = || -> Result<CancellationResult> {
        let proj = proj.ok_or_else(|| Error::HypothesisFailure("P is not a summand of M".into()))?;
        let fp = f_on_p()?;
        let homs = fp.homs.iter().map(|h| h.compose(&proj)).collect();
        let f = HomGenSet::new(Arc::clone(&d.m), Arc::clone(&d.n), homs)?;
        let sc = Scenario::new(
            Arc::clone(&d.k),
            Arc::clone(&d.l),
            Arc::clone(&d.m),
            Arc::clone(&d.n),
            d.iso.clone(),
            f,
            d.k_summand.clone(),
        )?;
        cancel_iso(&sc, cap)
    };
    report.cancellation = Some(run());
    report
}

/// Hypotheses of the Bass-Dress style corollary, then cancellation.
pub fn check_gen_bass(d: &CorollaryData, cap: usize) -> CorollaryReport {
    let ok = supported(d);
    let dim_y = usize::from(d.n.base == RingSpec::Integers);
    let mut conds = vec![
        check("(1)", ok, format!("maximal support is Noetherian of dimension {dim_y}")),
        check("(2)", ok, "N is finitely presented and E is module-finite"),
    ];
    let proj = if ok { p_projection(d) } else { Ok(None) };
    let c3 = (|| -> Result<(bool, String)> {
        if !ok {
            return Ok((false, "unsupported backend".into()));
        }
        if proj.clone()?.is_none() {
            return Ok((false, "P is not a summand of M".into()));
        }
        let pts: Vec<SpecPoint> = if d.n.base == RingSpec::Integers {
            vec![SpecPoint::maximal(2)]
        } else {
            spec_view(&d.n)?.points
        };
        for q in pts {
            if !local_summand(&d.p, &d.n, &q, 1 + dim_y)? {
                return Ok((false, format!("N^{} is not a summand of P at {q}", 1 + dim_y)));
            }
        }
        Ok((true, "local summand condition holds at every maximal point".into()))
    })();
    let (holds, detail) = c3.unwrap_or_else(|e| (false, e.to_string()));
    conds.push(check("(3)", holds, detail));
    let (p, n) = (Arc::clone(&d.p), Arc::clone(&d.n));
    let f_on_p = move || {
        if n.base == RingSpec::Integers {
            hom_group(&p, &n)
        } else {
            assemble_f(&p, &n, None)
        }
    };
    finish("gen-bass", d, conds, f_on_p, proj.ok().flatten(), cap)
}

/// Hypotheses of the De Stefani-Polstra-Yao style corollary, then
/// cancellation with `F = Hom(P, N)`.
pub fn check_gen_dspy(d: &CorollaryData, cap: usize) -> CorollaryReport {
    let ok = supported(d);
    let mut conds = vec![
        check("(1)", ok, "the base ring is Noetherian"),
        check("(2)", ok, "N is finitely generated and S is module-finite"),
    ];
    let proj = if ok { p_projection(d) } else { Ok(None) };
    let c3 = (|| -> Result<(bool, String)> {
        if !ok {
            return Ok((false, "unsupported backend".into()));
        }
        if proj.clone()?.is_none() {
            return Ok((false, "P is not a summand of M".into()));
        }
        let pts: Vec<SpecPoint> = if d.n.base == RingSpec::Integers {
            vec![SpecPoint::maximal(2), SpecPoint { prime: 0, dim_in_x: 1 }]
        } else {
            spec_view(&d.n)?.points
        };
        for q in pts {
            let t = 1 + q.dim_in_x as usize;
            if !local_summand(&d.p, &d.n, &q, t)? {
                return Ok((false, format!("N^{t} is not a summand of P at {q}")));
            }
        }
        Ok((true, "local summand condition holds at every point of X".into()))
    })();
    let (holds, detail) = c3.unwrap_or_else(|e| (false, e.to_string()));
    conds.push(check("(3)", holds, detail));
    let (p, n) = (Arc::clone(&d.p), Arc::clone(&d.n));
    finish("gen-dspy", d, conds, move || hom_group(&p, &n), proj.ok().flatten(), cap)
}

#[cfg(test)]
mod tests;
