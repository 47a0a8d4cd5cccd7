//! Sections with prescribed behaviour and the replacement of a pivot map.

use std::sync::Arc;

use super::{place_identity, Certificate, ElimMatrix, SplitContext};
use crate::error::{Error, Result};
use crate::finmod::{split_section, HomElem};
use crate::rings::Side;

/// Output of [`special_section`]: `e y + f z = 1` and `h z = u` is a unit.
#[derive(Clone, Debug)]
pub struct SpecialSection {
    pub d: HomElem,
    pub y: HomElem,
    pub z: HomElem,
    pub u: HomElem,
}

/// For `(e, f)` split surjective and `h` split surjective, finds `z : N -> M`
/// with `eE + fzE = E` and `hz` a unit of `E`.
///
/// `pq` are `p, q` with `e p + f q = 1`, and `r` satisfies `h r = 1`; missing
/// witnesses are searched for.
pub fn special_section(
    ctx: &SplitContext,
    e: &HomElem,
    f: &HomElem,
    h: &HomElem,
    pq: Option<(HomElem, HomElem)>,
    r: Option<HomElem>,
) -> Result<SpecialSection> {
    let one = ctx.e_one();
    let (p, q) = match pq {
        Some(w) => w,
        None => {
            let row = HomElem::row(&[e.clone(), f.clone()])?;
            let s = split_section(&row)?
                .ok_or_else(|| Error::WitnessInvalid("(e, f) is not split surjective".into()))?;
            let parts = [Arc::clone(&ctx.n), Arc::clone(&ctx.m)];
            let cols = [Arc::clone(&ctx.n)];
            (s.sub_block(&parts, &cols, 0, 0), s.sub_block(&parts, &cols, 1, 0))
        }
    };
    if e.compose(&p).add(&f.compose(&q)) != one {
        return Err(Error::WitnessInvalid("e p + f q is not the identity".into()));
    }
    let r = match r {
        Some(r) => r,
        None => split_section(h)?
            .ok_or_else(|| Error::WitnessInvalid("h is not split surjective".into()))?,
    };
    if h.compose(&r) != one {
        return Err(Error::WitnessInvalid("h r is not the identity".into()));
    }
    let hq = h.compose(&q);
    let fr = f.compose(&r);
    let d = ctx.sr1(&hq, &one.sub(&hq.compose(&fr)), Side::Right)?;
    let tail = one.sub(&fr.compose(&d));
    let y = p.compose(&tail);
    let z = q.compose(&tail).add(&r.compose(&d));
    let u = h.compose(&z);
    if e.compose(&y).add(&f.compose(&z)) != one || ctx.e_inverse(&u).is_err() {
        return Err(Error::VerificationFailure("special section identities fail".into()));
    }
    Ok(SpecialSection { d, y, z, u })
}

/// Replaces the first map of a split column by `y`.
///
/// `witness` shows `δ(E g_1 + ... + E g_n) >= m` (an `m x n` matrix with split
/// image). `y_row` gives `y = sum_j y_row[j] g_j` with `y_row[0] = 1` and
/// `y_row[1..m] = 0`, and `y_section` optionally gives `y q = 1`. The result is
/// a matrix whose first row is `y_row`, whose other rows are `e_i` on the first
/// `m` columns, and whose image splits.
pub fn replacement(
    ctx: &SplitContext,
    g: &[HomElem],
    witness: &ElimMatrix,
    y_row: &[HomElem],
    y_section: Option<HomElem>,
) -> Result<Certificate> {
    let (n, m) = (g.len(), witness.rows());
    if n < 2 || m == 0 || m >= n || y_row.len() != n {
        return Err(Error::Shape(format!(
            "replacement needs 1 <= m < n and a full coefficient row (n = {n}, m = {m})"
        )));
    }
    let one = ctx.e_one();
    if y_row[0] != one || y_row[1..m].iter().any(|c| !c.is_zero()) {
        return Err(Error::PreconditionUnverified(
            "y must lie in g_1 + E g_(m+1) + ... + E g_n".into(),
        ));
    }
    let y = ctx.combine(y_row, g);
    let q = match y_section {
        Some(q) => q,
        None => split_section(&y)?
            .ok_or_else(|| Error::PreconditionUnverified("y is not split surjective".into()))?,
    };
    if y.compose(&q) != one {
        return Err(Error::WitnessInvalid("y q is not the identity".into()));
    }
    let placed = place_identity(ctx, g, &(0..m).collect::<Vec<_>>(), witness)?;
    let a = &placed.matrix.entries;
    let xs = &placed.column;
    let zs = &placed.section;
    let (x, p) = (&xs[0], &zs[0]);
    let id_m = ctx.m_one();

    // Units u, v, w of End(M) with x u v w = y.
    let pi = id_m.sub(&q.compose(&y));
    let xq = x.compose(&q);
    let d = ctx.sr1(&xq, &x.compose(&pi).compose(p), Side::Right)?;
    let t = xq.add(&x.compose(&pi).compose(p).compose(&d));
    let t_inv = ctx.e_inverse(&t)?;
    let pdy = pi.compose(p).compose(&d).compose(&y);
    let u = id_m.add(&pdy);
    let u_inv = id_m.sub(&pdy);
    let v = pi.add(&q.compose(&t_inv).compose(&y));
    let v_inv = pi.add(&q.compose(&t).compose(&y));
    let qxpi = q.compose(x).compose(&pi);
    let w = id_m.sub(&qxpi);
    let w_inv = id_m.add(&qxpi);
    if x.compose(&u).compose(&v).compose(&w) != y {
        return Err(Error::VerificationFailure("x u v w differs from y".into()));
    }
    for (a1, a2) in [(&u, &u_inv), (&v, &v_inv), (&w, &w_inv)] {
        if a1.compose(a2) != id_m || a2.compose(a1) != id_m {
            return Err(Error::VerificationFailure("unit inverse formula fails".into()));
        }
    }

    // Row i of B satisfies B_i g = x_i u v w:
    //   x_i u v w = x_i - μ_i x + (μ_i x q + ν_i) y
    // with μ_i = x_i u v q and ν_i = (x_i u q) t^-1 - x_i q.
    let uvw = u.compose(&v).compose(&w);
    let mut rows = vec![y_row.to_vec()];
    for i in 1..m {
        let xi = &xs[i];
        let mu = xi.compose(&u).compose(&v).compose(&q);
        let nu = xi.compose(&u).compose(&q).compose(&t_inv).sub(&xi.compose(&q));
        let coef_y = mu.compose(&xq).add(&nu);
        let row: Vec<HomElem> = (0..n)
            .map(|j| {
                a[i][j]
                    .sub(&mu.compose(&a[0][j]))
                    .add(&coef_y.compose(&y_row[j]))
            })
            .collect();
        if ctx.combine(&row, g) != xi.compose(&uvw) {
            return Err(Error::VerificationFailure("row does not realize x_i u v w".into()));
        }
        rows.push(row);
    }
    let inv = w_inv.compose(&v_inv).compose(&u_inv);
    let mut section: Vec<HomElem> = zs.iter().map(|z| inv.compose(z)).collect();

    // Clear the first column below the pivot.
    for i in 1..m {
        let c = rows[i][0].clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..n {
            rows[i][j] = rows[i][j].sub(&c.compose(&y_row[j]));
        }
        section[0] = section[0].add(&section[i].compose(&c));
    }
    let matrix = ElimMatrix { entries: rows };
    let cert = Certificate {
        column: matrix.apply(ctx, g),
        matrix,
        section,
    };
    cert.verify(ctx, g)?;
    let shaped = (1..m).all(|i| {
        (0..m).all(|j| {
            let c = &cert.matrix.entries[i][j];
            if i == j {
                *c == one
            } else {
                c.is_zero()
            }
        })
    });
    if cert.column[0] != y || !shaped {
        return Err(Error::VerificationFailure("replacement shape is wrong".into()));
    }
    Ok(cert)
}
