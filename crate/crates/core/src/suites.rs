//! Randomized verification suites, one per elimination lemma.
//!
//! Every trial builds a random instance satisfying the lemma's hypotheses,
//! runs the constructive procedure and re-checks its certificate by direct
//! composition. Trials are independent: trial `i` draws from a ChaCha8 stream
//! `i` under the suite seed, so reports do not depend on thread scheduling.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::cancel::{cancel_iso, main_lemma_step, Scenario, SEARCH_CAP};
use crate::delta::{delta_global, mu_e, x_split_check, Delta, DEFAULT_CAP};
use crate::elim::{
    badsc_witness, df_lift, place_identity, replacement, rows_procedure, shorten,
    special_section, split_form_witness, ElimMatrix, SplitContext,
};
use crate::error::{Error, Result};
use crate::finmod::{
    hom_group, inverse, iso_oracle, random_hom, split_section, FPModule, HomElem, HomGenSet,
};
use crate::rings::{Ring, RingSpec, Value};

/// Suite names accepted by [`run_suite`].
pub const LEMMAS: &[&str] = &[
    "DF",
    "spl-infty",
    "identity",
    "canc-delta-one",
    "special-section",
    "replacement",
    "badsc",
    "fedsgz",
    "rows",
    "main-lemma",
    "main-theorem",
];

/// How many failure messages a report keeps.
const MAX_DETAILS: usize = 5;

/// Attempts at drawing an instance before a trial is skipped.
const RETRIES: usize = 64;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub ring: RingSpec,
    pub trials: usize,
    pub seed: u64,
    /// `badsc`: sweep every admissible triple; `rows`: walk every reply sequence.
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub lemma: String,
    pub ring: String,
    pub seed: u64,
    pub exhaustive: bool,
    /// Verified cases (an exhaustive walk counts every leaf).
    pub cases: usize,
    pub failures: usize,
    pub skipped: usize,
    pub details: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "lemma": self.lemma,
            "ring": self.ring,
            "seed": self.seed,
            "exhaustive": self.exhaustive,
            "cases": self.cases,
            "failures": self.failures,
            "skipped": self.skipped,
            "details": self.details,
        })
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug)]
enum Outcome {
    /// Number of verified cases.
    Pass(usize),
    Fail(String),
    Skip,
}

/// The RNG for trial `i` under `seed`.
pub fn trial_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Runs `cfg.trials` independent trials of `lemma` (or one exhaustive sweep).
pub fn run_suite(lemma: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !LEMMAS.contains(&lemma) {
        return Err(Error::Unsupported(format!(
            "unknown lemma {lemma:?}; expected one of {}",
            LEMMAS.join(", ")
        )));
    }
    let ring = &cfg.ring;
    if ring.cardinality().is_none() {
        return Err(Error::Unsupported(format!(
            "randomized suites need a finite ring, got {}",
            ring.short_name()
        )));
    }
    if lemma != "badsc" && !ring.is_pir() {
        return Err(Error::Unsupported(format!(
            "module suites need a commutative principal ideal ring, got {}",
            ring.short_name()
        )));
    }
    let outcomes: Vec<Outcome> = if lemma == "badsc" && cfg.exhaustive {
        vec![badsc_sweep(ring)]
    } else {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(cfg.seed, i);
                match run_trial(lemma, ring, cfg.exhaustive, &mut rng) {
                    Ok(o) => o,
                    Err(e) => Outcome::Fail(format!("trial {i}: {e}")),
                }
            })
            .collect()
    };
    let mut report = SuiteReport {
        lemma: lemma.to_string(),
        ring: ring.short_name(),
        seed: cfg.seed,
        exhaustive: cfg.exhaustive,
        cases: 0,
        failures: 0,
        skipped: 0,
        details: Vec::new(),
    };
    for o in outcomes {
        match o {
            Outcome::Pass(k) => report.cases += k,
            Outcome::Skip => report.skipped += 1,
            Outcome::Fail(msg) => {
                report.failures += 1;
                if report.details.len() < MAX_DETAILS {
                    report.details.push(msg);
                }
            }
        }
    }
    Ok(report)
}

fn run_trial(lemma: &str, ring: &RingSpec, exhaustive: bool, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    match lemma {
        "DF" => trial_df(ring, rng),
        "spl-infty" => trial_spl_infty(ring, rng),
        "identity" => trial_identity(ring, rng),
        "canc-delta-one" => trial_shorten(ring, rng),
        "special-section" => trial_special_section(ring, rng),
        "replacement" => trial_replacement(ring, rng),
        "badsc" => trial_badsc(ring, rng),
        "fedsgz" => trial_split_form(ring, rng),
        "rows" => trial_rows(ring, exhaustive, rng),
        "main-lemma" => trial_main_lemma(ring, rng),
        "main-theorem" => trial_main_theorem(ring, rng),
        _ => unreachable!("lemma names are checked by run_suite"),
    }
}

fn fail(msg: impl Into<String>) -> Outcome {
    Outcome::Fail(msg.into())
}

// ---------------------------------------------------------------------------
// Random modules and maps

/// A random invariant `d` with `S/(d)` nonzero: `0` (free) or a proper divisor.
fn random_invariant(ring: &RingSpec, rng: &mut impl Rng) -> Value {
    match ring {
        RingSpec::IntegersModN(n) => {
            let ds: Vec<u64> = (2..*n).filter(|d| n % d == 0).collect();
            if ds.is_empty() || rng.gen_bool(0.5) {
                Value::Res(0)
            } else {
                Value::Res(ds[rng.gen_range(0..ds.len())])
            }
        }
        _ => ring.zero(),
    }
}

/// A random nonzero module on `gens` generators.
pub fn random_module(ring: &RingSpec, gens: usize, rng: &mut impl Rng) -> Result<Arc<FPModule>> {
    let ds: Vec<Value> = (0..gens).map(|_| random_invariant(ring, rng)).collect();
    Ok(Arc::new(FPModule::from_invariants(ring.clone(), &ds)?))
}

/// A random automorphism, drawn by rejection from random endomorphisms.
pub fn random_automorphism(x: &Arc<FPModule>, rng: &mut impl Rng) -> Result<HomElem> {
    for _ in 0..1000 {
        let h = random_hom(x, x, rng)?;
        if inverse(&h)?.is_some() {
            return Ok(h);
        }
    }
    Err(Error::CapExceeded { lower_bound: 1000 })
}

fn random_unit(ctx: &SplitContext, rng: &mut impl Rng) -> Result<HomElem> {
    random_automorphism(&ctx.n, rng)
}

/// A random `e` with `(e, f)` split surjective; falls back to a unit.
fn random_pair_partner(ctx: &SplitContext, f: &HomElem, rng: &mut impl Rng) -> Result<HomElem> {
    for _ in 0..8 {
        let e = random_hom(&ctx.n, &ctx.n, rng)?;
        if split_section(&HomElem::row(&[e.clone(), f.clone()])?)?.is_some() {
            return Ok(e);
        }
    }
    random_unit(ctx, rng)
}

/// A random instance with a known split part.
///
/// `M = N^m + T` and `f = (π_1, ..., π_m, r_1, ..., r_extra)` with `π_i` the
/// block projections and `r_j` random; the column handed to the procedures is
/// `g = U f` for a random invertible `U`, and `witness = [I_m 0] U^-1` shows
/// `δ(g) >= m`.
struct Instance {
    ctx: SplitContext,
    g: Vec<HomElem>,
    u: ElimMatrix,
    witness: ElimMatrix,
}

fn instance(ring: &RingSpec, m: usize, extra: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    // N gets two generators only when M stays within three and S is tiny.
    let two = m == 1 && ring.cardinality().is_some_and(|c| c <= 4) && rng.gen_bool(0.3);
    let n = random_module(ring, if two { 2 } else { 1 }, rng)?;
    let t_gens = rng.gen_range(0..=3 - m * n.gens);
    let t = random_module(ring, t_gens, rng)?;
    let mut parts: Vec<&FPModule> = vec![&*n; m];
    if t_gens > 0 {
        parts.push(&t);
    }
    let mm = Arc::new(FPModule::direct_sum(&parts)?);
    let blocks: Vec<Arc<FPModule>> = parts.iter().map(|p| Arc::new((*p).clone())).collect();
    let ctx = SplitContext::new(Arc::clone(&mm), Arc::clone(&n))?;
    let mut f = Vec::with_capacity(m + extra);
    for i in 0..m {
        let row: Vec<HomElem> = blocks
            .iter()
            .enumerate()
            .map(|(j, b)| {
                if j == i {
                    HomElem::identity(Arc::clone(&n))
                } else {
                    HomElem::zero(Arc::clone(b), Arc::clone(&n))
                }
            })
            .collect();
        f.push(HomElem::row(&row)?.retarget(Arc::clone(&mm), Arc::clone(&n)));
    }
    for _ in 0..extra {
        f.push(random_hom(&mm, &n, rng)?);
    }
    let size = m + extra;
    let mut u = ElimMatrix::identity(&ctx, size);
    let mut u_inv = ElimMatrix::identity(&ctx, size);
    for _ in 0..3 * size {
        let i = rng.gen_range(0..size);
        if size == 1 || rng.gen_bool(0.25) {
            let s = random_unit(&ctx, rng)?;
            let s_inv = ctx.e_inverse(&s)?;
            for x in u.entries[i].iter_mut() {
                *x = s.compose(x);
            }
            for r in u_inv.entries.iter_mut() {
                r[i] = r[i].compose(&s_inv);
            }
            continue;
        }
        let j = (i + rng.gen_range(1..size)) % size;
        let a = random_hom(&n, &n, rng)?;
        // U <- (1 + a e_ij) U and U^-1 <- U^-1 (1 - a e_ij).
        let row_j = u.entries[j].clone();
        for (x, y) in u.entries[i].iter_mut().zip(&row_j) {
            *x = x.add(&a.compose(y));
        }
        for r in u_inv.entries.iter_mut() {
            r[j] = r[j].sub(&r[i].compose(&a));
        }
    }
    if u.mul(&u_inv, &ctx) != ElimMatrix::identity(&ctx, size) {
        return Err(Error::VerificationFailure("generated U^-1 is wrong".into()));
    }
    let g = u.apply(&ctx, &f);
    let witness = ElimMatrix::new(u_inv.entries[..m].to_vec())?;
    Ok(Instance {
        ctx,
        g,
        u,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Trials

/// `f` is split surjective exactly when `E f` contains a split surjection, and
/// the lift from a witness `(p f) k = 1` is a section of `f`.
fn trial_df(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let inst = instance(ring, 1, 1, rng)?;
    let ctx = &inst.ctx;
    let f = if rng.gen_bool(0.5) {
        random_hom(&ctx.m, &ctx.n, rng)?
    } else {
        let a = random_hom(&ctx.n, &ctx.n, rng)?;
        inst.g[0].add(&a.compose(&inst.g[1]))
    };
    let direct = split_section(&f)?.is_some();
    let mut witness = None;
    for p in ctx.e.elements()? {
        if let Some(k) = split_section(&p.compose(&f))? {
            witness = Some((p, k));
            break;
        }
    }
    if direct != witness.is_some() {
        return Ok(fail(format!(
            "f split: {direct}, E f contains a split map: {}",
            witness.is_some()
        )));
    }
    if let Some((p, k)) = witness {
        let h = df_lift(ctx, &f, &p, &k)?;
        if f.compose(&h) != ctx.e_one() {
            return Ok(fail("lifted map is not a section"));
        }
    }
    Ok(Outcome::Pass(1))
}

/// `δ = ∞` exactly when `N = 0`, and otherwise `δ <= μ`.
fn trial_spl_infty(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let m = random_module(ring, rng.gen_range(1..=2), rng)?;
    let n = if rng.gen_bool(0.2) {
        Arc::new(FPModule::zero(ring.clone())?)
    } else {
        random_module(ring, 1, rng)?
    };
    let homs = (0..rng.gen_range(1..=3))
        .map(|_| random_hom(&m, &n, rng))
        .collect::<Result<Vec<_>>>()?;
    let fam = HomGenSet::new(Arc::clone(&m), Arc::clone(&n), homs)?;
    let delta = delta_global(&fam, DEFAULT_CAP)?;
    if (delta == Delta::Infinite) != n.is_zero() {
        return Ok(fail(format!("δ = {delta} with N zero: {}", n.is_zero())));
    }
    if let Delta::Finite(d) = delta {
        let mu = mu_e(&fam, DEFAULT_CAP)?;
        if d > mu {
            return Ok(fail(format!("δ = {d} exceeds μ = {mu}")));
        }
    }
    Ok(Outcome::Pass(1))
}

fn trial_identity(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let m = rng.gen_range(1..=2);
    let inst = instance(ring, m, rng.gen_range(0..=2), rng)?;
    let mut cols: Vec<usize> = (0..inst.g.len()).collect();
    cols.shuffle(rng);
    let targets = &cols[..m];
    let cert = place_identity(&inst.ctx, &inst.g, targets, &inst.witness)?;
    cert.verify(&inst.ctx, &inst.g)?;
    if !cert.matrix.has_identity_at(targets) {
        return Ok(fail("identity columns not in place"));
    }
    Ok(Outcome::Pass(1))
}

fn trial_shorten(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let inst = instance(ring, 2, rng.gen_range(0..=2), rng)?;
    let ctx = &inst.ctx;
    let n = inst.g.len();
    let c = ElimMatrix::from_fn(2, n, |i, j| if i == j { ctx.e_one() } else { ctx.e_zero() });
    let cert = shorten(ctx, &inst.g, &inst.u, &c, 1)?;
    cert.verify(ctx, &inst.g[..n - 1])?;
    if cert.matrix.rows() != 1 {
        return Ok(fail("shortened certificate has the wrong height"));
    }
    Ok(Outcome::Pass(1))
}

fn trial_special_section(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let inst = instance(ring, 1, 1, rng)?;
    let ctx = &inst.ctx;
    let h = inst.ctx.combine(&inst.witness.entries[0], &inst.g);
    let f = random_hom(&ctx.m, &ctx.n, rng)?;
    let e = random_pair_partner(ctx, &f, rng)?;
    let out = special_section(ctx, &e, &f, &h, None, None)?;
    if e.compose(&out.y).add(&f.compose(&out.z)) != ctx.e_one() {
        return Ok(fail("e y + f z is not the identity"));
    }
    if h.compose(&out.z) != out.u || ctx.e_inverse(&out.u).is_err() {
        return Ok(fail("h z is not a unit"));
    }
    Ok(Outcome::Pass(1))
}

fn trial_replacement(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let m = rng.gen_range(1..=2);
    let inst = instance(ring, m, rng.gen_range(1..=2), rng)?;
    let ctx = &inst.ctx;
    let n = inst.g.len();
    for _ in 0..RETRIES {
        let mut y_row = vec![ctx.e_zero(); n];
        y_row[0] = ctx.e_one();
        for c in &mut y_row[m..] {
            *c = random_hom(&ctx.n, &ctx.n, rng)?;
        }
        let y = ctx.combine(&y_row, &inst.g);
        if split_section(&y)?.is_none() {
            continue;
        }
        let cert = replacement(ctx, &inst.g, &inst.witness, &y_row, None)?;
        cert.verify(ctx, &inst.g)?;
        if cert.column[0] != y || cert.matrix.entries[0] != y_row {
            return Ok(fail("first row is not y"));
        }
        return Ok(Outcome::Pass(1));
    }
    Ok(Outcome::Skip)
}

fn badsc_check(ring: &RingSpec, a: &Value, b: &Value, c: &Value) -> Result<Option<String>> {
    let w = badsc_witness(ring, a, b, c, Default::default())?;
    for s in ring.central_units()? {
        let x = ring.add(b, &ring.mul3(&ring.mul(a, &w.d), &s, c));
        if !ring.is_unit(&x) {
            return Ok(Some(format!("b + a d s c not a unit at a={a}, b={b}, c={c}, s={s}")));
        }
    }
    Ok(None)
}

fn admissible(ring: &RingSpec, a: &Value, b: &Value, c: &Value) -> Result<bool> {
    Ok(ring.right_unimodular_witness(a, b)?.is_some()
        && ring.left_unimodular_witness(b, c)?.is_some())
}

fn trial_badsc(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let all = ring.elements()?;
    for _ in 0..RETRIES {
        let pick = |rng: &mut ChaCha8Rng| all[rng.gen_range(0..all.len())].clone();
        let (a, b, c) = (pick(rng), pick(rng), pick(rng));
        if !admissible(ring, &a, &b, &c)? {
            continue;
        }
        return Ok(match badsc_check(ring, &a, &b, &c)? {
            Some(msg) => fail(msg),
            None => Outcome::Pass(1),
        });
    }
    Ok(Outcome::Skip)
}

/// Every admissible triple of the ring.
fn badsc_sweep(ring: &RingSpec) -> Outcome {
    let run = || -> Result<Outcome> {
        let all = ring.elements()?;
        let mut cases = 0;
        for a in &all {
            for b in &all {
                for c in &all {
                    if !admissible(ring, a, b, c)? {
                        continue;
                    }
                    if let Some(msg) = badsc_check(ring, a, b, c)? {
                        return Ok(fail(msg));
                    }
                    cases += 1;
                }
            }
        }
        Ok(Outcome::Pass(cases))
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

/// `h = α f + β g` is made split by choosing `g = β^-1 (π - α f)`.
fn trial_split_form(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let inst = instance(ring, 1, 1, rng)?;
    let ctx = &inst.ctx;
    let pi = ctx.combine(&inst.witness.entries[0], &inst.g);
    let f = random_hom(&ctx.m, &ctx.n, rng)?;
    let alpha = random_hom(&ctx.n, &ctx.n, rng)?;
    let beta = random_unit(ctx, rng)?;
    let g = ctx.e_inverse(&beta)?.compose(&pi.sub(&alpha.compose(&f)));
    let e = random_pair_partner(ctx, &f, rng)?;
    let out = split_form_witness(ctx, &e, &f, &g, (&alpha, &beta), None)?;
    if f.add(&e.compose(&out.d).compose(&g)).compose(&out.z) != ctx.e_one() {
        return Ok(fail("(f + e d g) z is not the identity"));
    }
    for s in ctx.e.central_units()? {
        let x = f.add(&e.compose(&out.d).compose(&s).compose(&g)).compose(&out.z);
        if ctx.e_inverse(&x).is_err() {
            return Ok(fail("(f + e d s g) z is not a unit"));
        }
    }
    Ok(Outcome::Pass(1))
}

/// Runs the row protocol with the given replies and checks its output.
fn rows_once(
    inst: &Instance,
    e: &HomElem,
    replies: &mut dyn FnMut(usize) -> HomElem,
) -> Result<Option<String>> {
    let ctx = &inst.ctx;
    let g = &inst.g;
    let (n, m) = (g.len(), inst.witness.rows());
    let out = rows_procedure(ctx, g, &inst.witness, e, &mut |i, _| replies(i))?;
    out.certificate.verify(ctx, &out.column)?;
    let last = &g[n - 1];
    for i in 0..n - 1 {
        let expected = if i >= m {
            g[i].clone()
        } else {
            let t = out.c[i].compose(&out.s[i]).compose(last);
            g[i].add(&if i == 0 { e.compose(&t) } else { t })
        };
        if out.column[i] != expected {
            return Ok(Some(format!("entry {} of the new column has the wrong form", i + 1)));
        }
    }
    Ok(None)
}

fn trial_rows(ring: &RingSpec, exhaustive: bool, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let m = rng.gen_range(1..=2);
    let inst = instance(ring, m, rng.gen_range(1..=2), rng)?;
    let ctx = &inst.ctx;
    let e = random_pair_partner(ctx, &inst.g[0], rng)?;
    let units = ctx.e.central_units()?;
    if !exhaustive {
        let replies: Vec<HomElem> = (0..m).map(|_| units.choose(rng).unwrap().clone()).collect();
        return Ok(match rows_once(&inst, &e, &mut |i| replies[i].clone())? {
            Some(msg) => fail(msg),
            None => Outcome::Pass(1),
        });
    }
    // Every sequence of replies, as a mixed-radix counter.
    let mut cases = 0;
    for mut idx in 0..units.len().pow(m as u32) {
        let replies: Vec<HomElem> = (0..m)
            .map(|_| {
                let s = units[idx % units.len()].clone();
                idx /= units.len();
                s
            })
            .collect();
        if let Some(msg) = rows_once(&inst, &e, &mut |i| replies[i].clone())? {
            return Ok(fail(msg));
        }
        cases += 1;
    }
    Ok(Outcome::Pass(cases))
}

fn trial_main_lemma(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = random_module(ring, 1, rng)?;
    let copies = rng.gen_range(1..=2);
    let t = random_module(ring, rng.gen_range(0..=3 - copies), rng)?;
    let mut parts: Vec<&FPModule> = vec![&*n; copies];
    if t.gens > 0 {
        parts.push(&t);
    }
    let m = Arc::new(FPModule::direct_sum(&parts)?);
    let len = rng.gen_range(2..=3);
    for _ in 0..RETRIES {
        let col = (0..len)
            .map(|_| random_hom(&m, &n, rng))
            .collect::<Result<Vec<_>>>()?;
        let fam = HomGenSet::new(Arc::clone(&m), Arc::clone(&n), col.clone())?;
        if !x_split_check(&fam)? {
            continue;
        }
        let ctx = SplitContext::new(Arc::clone(&m), Arc::clone(&n))?;
        let e = random_pair_partner(&ctx, &col[0], rng)?;
        let step = main_lemma_step(&col, &e, SEARCH_CAP as usize)?;
        let new = HomGenSet::new(Arc::clone(&m), Arc::clone(&n), step.column.clone())?;
        if !x_split_check(&new)? {
            return Ok(fail("shortened column is not X-split"));
        }
        if split_section(&HomElem::row(&[e.clone(), step.column[0].clone()])?)?.is_none() {
            return Ok(fail("(e, h_1) is not split surjective"));
        }
        return Ok(Outcome::Pass(1));
    }
    Ok(Outcome::Skip)
}

/// `K = N = S`, `M = S + T` and, when `swap` is set, `L = T + S` (otherwise
/// `L = M`), with `iso : S + L -> S + M` the coordinate identification
/// scrambled by random automorphisms on both sides.
pub fn scrambled_scenario(
    ring: &RingSpec,
    t: &Arc<FPModule>,
    swap: bool,
    rng: &mut impl Rng,
) -> Result<Scenario> {
    let s = Arc::new(FPModule::free(ring.clone(), 1)?);
    let m = Arc::new(FPModule::direct_sum(&[&s, t])?);
    let (l, lm) = if swap {
        let l = Arc::new(FPModule::direct_sum(&[t, &s])?);
        let lm = HomElem::block(
            &[
                vec![HomElem::zero(Arc::clone(t), Arc::clone(&s)), HomElem::identity(Arc::clone(&s))],
                vec![HomElem::identity(Arc::clone(t)), HomElem::zero(Arc::clone(&s), Arc::clone(t))],
            ],
            Arc::clone(&l),
            Arc::clone(&m),
        );
        (l, lm)
    } else {
        (Arc::clone(&m), HomElem::identity(Arc::clone(&m)))
    };
    let kl = Arc::new(FPModule::direct_sum(&[&s, &l])?);
    let km = Arc::new(FPModule::direct_sum(&[&s, &m])?);
    let diag = HomElem::block(
        &[
            vec![HomElem::identity(Arc::clone(&s)), HomElem::zero(Arc::clone(&l), Arc::clone(&s))],
            vec![HomElem::zero(Arc::clone(&s), Arc::clone(&m)), lm],
        ],
        Arc::clone(&kl),
        Arc::clone(&km),
    );
    let iso = random_automorphism(&km, rng)?
        .compose(&diag)
        .compose(&random_automorphism(&kl, rng)?);
    let f = hom_group(&m, &s)?;
    Scenario::new(Arc::clone(&s), l, m, s, iso, f, None)
}

/// Cancels `S` from a scrambled `S + L ≅ S + M` and compares the outcome with
/// the isomorphism oracle.
fn trial_main_theorem(ring: &RingSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = random_module(ring, rng.gen_range(1..=2), rng)?;
    let swap = rng.gen_bool(0.5);
    let sc = scrambled_scenario(ring, &t, swap, rng)?;
    let out = cancel_iso(&sc, SEARCH_CAP as usize)?;
    if !out.verify() {
        return Ok(fail("cancellation output does not compose to identities"));
    }
    if iso_oracle(&sc.l, &sc.m)?.is_none() {
        return Ok(fail("oracle finds no isomorphism L -> M"));
    }
    Ok(Outcome::Pass(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(ring: &str, trials: usize, exhaustive: bool) -> SuiteConfig {
        SuiteConfig {
            ring: RingSpec::parse_short(ring).unwrap(),
            trials,
            seed: 7,
            exhaustive,
        }
    }

    #[test]
    fn every_lemma_passes_a_few_trials() {
        for lemma in LEMMAS {
            let r = run_suite(lemma, &cfg("Zmod6", 4, false)).unwrap();
            assert!(r.passed(), "{lemma}: {:?}", r);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite("rows", &cfg("Zmod12", 6, false)).unwrap();
        let b = run_suite("rows", &cfg("Zmod12", 6, false)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exhaustive_badsc_counts_triples() {
        let r = run_suite("badsc", &cfg("Zmod6", 1, true)).unwrap();
        assert!(r.passed());
        assert!(r.cases > 100);
    }

    #[test]
    fn unknown_lemma_and_infinite_ring_are_rejected() {
        assert!(run_suite("nope", &cfg("Zmod6", 1, false)).is_err());
        assert!(run_suite("DF", &cfg("Z", 1, false)).is_err());
    }
}
