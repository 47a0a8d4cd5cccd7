//! Unit witnesses of the form `b + a d s c` and the row-by-row protocol built
//! on them.

use super::{place_identity, replacement, special_section, Certificate, ElimMatrix, SplitContext};
use crate::error::{Error, Result};
use crate::finmod::HomElem;
use crate::rings::{Ring, RingError};

/// Optional witnesses for [`badsc_witness`]: `b - b v b` in the Jacobson
/// radical with `v` a unit, `a e + b f = 1` and `g b + h c = 1`.
#[derive(Clone, Debug)]
pub struct BadscWitnesses<T> {
    pub v: Option<T>,
    pub ef: Option<(T, T)>,
    pub gh: Option<(T, T)>,
}

impl<T> Default for BadscWitnesses<T> {
    fn default() -> Self {
        BadscWitnesses {
            v: None,
            ef: None,
            gh: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BadscWitness<T> {
    pub d: T,
    pub v: T,
    pub e: T,
    pub f: T,
    pub g: T,
    pub h: T,
    /// Whether `b + a d s c` was checked for every central unit `s`, as
    /// opposed to the sample `{1, -1}` used when there are infinitely many.
    pub exhaustive: bool,
}

fn hypothesis(msg: &str) -> Error {
    Error::HypothesisFailure(msg.into())
}

/// Central units used to check a universally quantified unit statement.
fn central_unit_sample<R: Ring>(ring: &R) -> Result<(Vec<R::Elem>, bool)> {
    match ring.central_units() {
        Ok(us) => Ok((us, true)),
        Err(RingError::InfiniteRing) => {
            let one = ring.one();
            Ok((vec![ring.neg(&one), one], false))
        }
        Err(e) => Err(e.into()),
    }
}

/// For `aE + bE = E = Eb + Ec`, returns `d = e (v^-1 - b) h` such that
/// `b + a d s c` is a unit for every central unit `s`.
pub fn badsc_witness<R: Ring>(
    ring: &R,
    a: &R::Elem,
    b: &R::Elem,
    c: &R::Elem,
    given: BadscWitnesses<R::Elem>,
) -> Result<BadscWitness<R::Elem>> {
    let one = ring.one();
    let v = match given.v {
        Some(v) => v,
        None => ring
            .unit_regular_mod_jacobson(b)?
            .ok_or_else(|| hypothesis("b is not unit-regular modulo the Jacobson radical"))?,
    };
    let v_inv = ring
        .try_inverse(&v)
        .ok_or_else(|| Error::WitnessInvalid("v is not a unit".into()))?;
    if !ring.in_jacobson(&ring.sub(b, &ring.mul3(b, &v, b)))? {
        return Err(Error::WitnessInvalid("b - b v b is not in the Jacobson radical".into()));
    }
    let (e, f) = match given.ef {
        Some(w) => w,
        None => ring
            .right_unimodular_witness(a, b)?
            .ok_or_else(|| hypothesis("aE + bE is not E"))?,
    };
    if ring.add(&ring.mul(a, &e), &ring.mul(b, &f)) != one {
        return Err(Error::WitnessInvalid("a e + b f is not 1".into()));
    }
    let (g, h) = match given.gh {
        Some(w) => w,
        None => ring
            .left_unimodular_witness(b, c)?
            .ok_or_else(|| hypothesis("Eb + Ec is not E"))?,
    };
    if ring.add(&ring.mul(&g, b), &ring.mul(&h, c)) != one {
        return Err(Error::WitnessInvalid("g b + h c is not 1".into()));
    }
    let d = ring.mul3(&e, &ring.sub(&v_inv, b), &h);
    let (sample, exhaustive) = central_unit_sample(ring)?;
    let ad = ring.mul(a, &d);
    for s in &sample {
        let x = ring.add(b, &ring.mul3(&ad, s, c));
        if !ring.is_unit(&x) {
            return Err(Error::VerificationFailure(format!(
                "b + a d s c is not a unit for s = {s:?}"
            )));
        }
    }
    Ok(BadscWitness {
        d,
        v,
        e,
        f,
        g,
        h,
        exhaustive,
    })
}

/// Output of [`split_form_witness`]: `(f + e d s g) z` is a unit for every
/// central unit `s`, and `(f + e d g) z = 1`.
#[derive(Clone, Debug)]
pub struct SplitForm {
    pub d: HomElem,
    pub z: HomElem,
}

/// For `(e, f)` split surjective and `h = alpha f + beta g` split surjective,
/// finds `d` and `z` making `(f + e d s g) z` a unit for all central `s`.
pub fn split_form_witness(
    ctx: &SplitContext,
    e: &HomElem,
    f: &HomElem,
    g: &HomElem,
    h_coeffs: (&HomElem, &HomElem),
    pq: Option<(HomElem, HomElem)>,
) -> Result<SplitForm> {
    let (alpha, beta) = h_coeffs;
    let h = alpha.compose(f).add(&beta.compose(g));
    let sec = special_section(ctx, e, f, &h, pq, None).map_err(|err| match err {
        Error::WitnessInvalid(m) => Error::HypothesisFailure(m),
        other => other,
    })?;
    let z = sec.z;
    let (fz, gz) = (f.compose(&z), g.compose(&z));
    let hz_inv = ctx.e_inverse(&sec.u)?;
    let given = BadscWitnesses {
        v: None,
        ef: Some((sec.y.clone(), ctx.e_one())),
        gh: Some((hz_inv.compose(alpha), hz_inv.compose(beta))),
    };
    let w = badsc_witness(&*ctx.e, e, &fz, &gz, given)?;
    let d = w.d;
    let u = fz.add(&e.compose(&d).compose(&gz));
    let z = z.compose(&ctx.e_inverse(&u)?);
    let edg = e.compose(&d).compose(g);
    if f.add(&edg).compose(&z) != ctx.e_one() {
        return Err(Error::VerificationFailure("(f + e d g) z is not the identity".into()));
    }
    let (sample, _) = central_unit_sample(&*ctx.e)?;
    for s in &sample {
        let x = f.add(&e.compose(&d).compose(s).compose(g)).compose(&z);
        if ctx.e_inverse(&x).is_err() {
            return Err(Error::VerificationFailure(format!(
                "(f + e d s g) z is not a unit for s = {s:?}"
            )));
        }
    }
    Ok(SplitForm { d, z })
}

/// Result of [`rows_procedure`].
#[derive(Clone, Debug)]
pub struct RowsOutcome {
    /// The announced `c_1, ..., c_m`.
    pub c: Vec<HomElem>,
    /// The chooser's replies `s_1, ..., s_m`.
    pub s: Vec<HomElem>,
    /// `(g_1 + e c_1 s_1 g_n, g_2 + c_2 s_2 g_n, ..., g_m + c_m s_m g_n,
    /// g_(m+1), ..., g_(n-1))`.
    pub column: Vec<HomElem>,
    /// An `m x (n-1)` matrix over the new column with a section.
    pub certificate: Certificate,
}

/// Absorbs `g_n` into the first `m` maps of the column while keeping
/// `δ >= m` on the remaining `n - 1` maps.
///
/// Runs as a protocol: for each row `i` the procedure announces `c_i`, then
/// `chooser(i, c_i)` replies with any central unit `s_i` of `E`. The returned
/// certificate is valid for every sequence of replies.
pub fn rows_procedure(
    ctx: &SplitContext,
    g: &[HomElem],
    witness: &ElimMatrix,
    e: &HomElem,
    chooser: &mut dyn FnMut(usize, &HomElem) -> HomElem,
) -> Result<RowsOutcome> {
    let (n, m) = (g.len(), witness.rows());
    if n < 2 || m == 0 || m >= n {
        return Err(Error::Shape(format!(
            "rows_procedure needs 1 <= m < n (n = {n}, m = {m})"
        )));
    }
    let one = ctx.e_one();
    let mut ask = |i: usize, c: &HomElem| -> Result<HomElem> {
        let s = chooser(i, c);
        if ctx.e.is_central_unit(&s)? {
            Ok(s)
        } else {
            Err(Error::ChooserReturnedNonCentralUnit)
        }
    };
    let placed = place_identity(ctx, g, &(0..m).collect::<Vec<_>>(), witness)?;

    // First row: fold the tail of the pivot row through e.
    let tail = |row: &[HomElem]| -> HomElem { ctx.combine(&row[m..], &g[m..]) };
    let sigma = tail(&placed.matrix.entries[0]);
    let form = split_form_witness(ctx, e, &g[0], &sigma, (&one, &one), None)?;
    let b1: Vec<HomElem> = placed.matrix.entries[0][m..]
        .iter()
        .map(|a| form.d.compose(a))
        .collect();
    let c1 = b1[n - m - 1].clone();
    let s1 = ask(0, &c1)?;
    let mut y_row = vec![ctx.e_zero(); n];
    y_row[0] = one.clone();
    for (j, b) in b1.iter().enumerate() {
        y_row[m + j] = e.compose(b).compose(&s1);
    }
    let y = ctx.combine(&y_row, g);
    let yz = y.compose(&form.z);
    let q = form.z.compose(&ctx.e_inverse(&yz)?);
    let first = replacement(ctx, g, &placed.matrix, &y_row, Some(q))?;
    let mut rows = first.matrix.entries;
    let mut z = first.section;
    let mut cs = vec![c1];
    let mut ss = vec![s1];

    for k in 1..m {
        let sigma = tail(&rows[k]);
        let b = g[k].compose(&z[k]);
        let c = sigma.compose(&z[k]);
        // b + c = 1, so both one-sided pairs are unimodular with unit witnesses.
        let given = BadscWitnesses {
            v: None,
            ef: Some((one.clone(), ctx.e_zero())),
            gh: Some((one.clone(), one.clone())),
        };
        let w = badsc_witness(&*ctx.e, &one, &b, &c, given)?;
        let bk: Vec<HomElem> = rows[k][m..].iter().map(|a| w.d.compose(a)).collect();
        let ck = bk[n - m - 1].clone();
        let sk = ask(k, &ck)?;
        for (j, bj) in bk.iter().enumerate() {
            rows[k][m + j] = bj.compose(&sk);
        }
        let yk = ctx.combine(&rows[k], g);
        let u = yk.compose(&z[k]);
        let u_inv = ctx.e_inverse(&u)?;
        let zk = z[k].compose(&u_inv);
        for j in (0..m).filter(|&j| j != k) {
            z[j] = z[j].sub(&zk.compose(&yk).compose(&z[j]));
        }
        z[k] = zk;
        cs.push(ck);
        ss.push(sk);
        let col: Vec<HomElem> = rows.iter().map(|r| ctx.combine(r, g)).collect();
        if !ctx.is_section(&col, &z) {
            return Err(Error::VerificationFailure(format!(
                "section update failed at row {}",
                k + 1
            )));
        }
    }

    // Drop the last column, absorbing g_n into the first m maps.
    let last = n - 1;
    let column: Vec<HomElem> = (0..last)
        .map(|i| {
            if i < m {
                g[i].add(&rows[i][last].compose(&g[last]))
            } else {
                g[i].clone()
            }
        })
        .collect();
    let matrix = ElimMatrix {
        entries: rows.iter().map(|r| r[..last].to_vec()).collect(),
    };
    let certificate = Certificate {
        column: matrix.apply(ctx, &column),
        matrix,
        section: z,
    };
    certificate.verify(ctx, &column)?;
    Ok(RowsOutcome {
        c: cs,
        s: ss,
        column,
        certificate,
    })
}
