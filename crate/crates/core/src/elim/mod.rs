//! Constructive elimination over `E = End_S(N)` acting on maps `M -> N`.
//!
//! A column `g = (g_1, ..., g_n)^T` of maps `M -> N` is acted on by matrices
//! over `E` from the left: `(A g)_i = sum_j a_ij ∘ g_j`. A column of `m` maps is
//! split surjective when it has a section `(z_1, ..., z_m)` with
//! `g_i ∘ z_l = δ_il`; every procedure here returns such a section as its
//! certificate.

mod sections;
mod witness;

use std::sync::Arc;

use serde_json::json;

pub use sections::{replacement, special_section, SpecialSection};
pub use witness::{
    badsc_witness, rows_procedure, split_form_witness, BadscWitness, BadscWitnesses,
    RowsOutcome, SplitForm,
};

use crate::error::{Error, Result};
use crate::finmod::{inverse, split_section, EndRing, FPModule, HomElem, HomGenSet};
use crate::rings::{Ring, RingError, RingSpec, Side};

/// Shared data for elimination over `E = End_S(N)` on `Hom_S(M, N)`.
#[derive(Clone, Debug)]
pub struct SplitContext {
    pub base: RingSpec,
    pub m: Arc<FPModule>,
    pub n: Arc<FPModule>,
    pub e: Arc<EndRing>,
}

impl SplitContext {
    pub fn new(m: Arc<FPModule>, n: Arc<FPModule>) -> Result<Self> {
        if m.base != n.base {
            return Err(RingError::MixedRings.into());
        }
        let e = Arc::new(EndRing::new(Arc::clone(&n))?);
        Ok(SplitContext {
            base: m.base.clone(),
            m,
            n,
            e,
        })
    }

    pub fn e_one(&self) -> HomElem {
        HomElem::identity(Arc::clone(&self.n))
    }

    pub fn e_zero(&self) -> HomElem {
        HomElem::zero(Arc::clone(&self.n), Arc::clone(&self.n))
    }

    pub fn m_one(&self) -> HomElem {
        HomElem::identity(Arc::clone(&self.m))
    }

    pub fn hom_zero(&self) -> HomElem {
        HomElem::zero(Arc::clone(&self.m), Arc::clone(&self.n))
    }

    /// `sum_j row_j ∘ g_j`.
    pub fn combine(&self, row: &[HomElem], g: &[HomElem]) -> HomElem {
        row.iter()
            .zip(g)
            .fold(self.hom_zero(), |acc, (a, gj)| acc.add(&a.compose(gj)))
    }

    pub fn e_inverse(&self, x: &HomElem) -> Result<HomElem> {
        self.e
            .try_inverse(x)
            .ok_or_else(|| Error::InverseNotFound(format!("{x:?} is not a unit of E")))
    }

    /// `d` with `a + b d` (right) or `a + d b` (left) a unit of `E`.
    pub fn sr1(&self, a: &HomElem, b: &HomElem, side: Side) -> Result<HomElem> {
        self.e
            .sr1_pair_witness(a, b, side)
            .map_err(|e| Error::OracleFailure(e.to_string()))
    }

    /// A section of the column `(c_1, ..., c_k)^T`, if the column splits.
    pub fn section(&self, col: &[HomElem]) -> Result<Option<Vec<HomElem>>> {
        let whole = HomElem::column(col)?;
        let Some(z) = split_section(&whole)? else {
            return Ok(None);
        };
        let parts = vec![Arc::clone(&self.n); col.len()];
        let rows = [Arc::clone(&self.m)];
        Ok(Some(
            (0..col.len()).map(|l| z.sub_block(&rows, &parts, 0, l)).collect(),
        ))
    }

    /// Whether `col_i ∘ z_l = δ_il` for all `i, l`.
    pub fn is_section(&self, col: &[HomElem], z: &[HomElem]) -> bool {
        col.len() == z.len()
            && col.iter().enumerate().all(|(i, c)| {
                z.iter().enumerate().all(|(l, zl)| {
                    let p = c.compose(zl);
                    if i == l {
                        p == self.e_one()
                    } else {
                        p.is_zero()
                    }
                })
            })
    }

    /// The inverse of an `n x n` matrix over `E`, if it is invertible.
    pub fn matrix_inverse(&self, u: &ElimMatrix) -> Result<Option<ElimMatrix>> {
        let k = u.rows();
        if k == 0 || u.cols() != k {
            return Err(Error::Shape("matrix_inverse needs a square matrix".into()));
        }
        let parts = vec![Arc::clone(&self.n); k];
        let refs: Vec<&FPModule> = parts.iter().map(|p| &**p).collect();
        let sum = Arc::new(FPModule::direct_sum(&refs)?);
        let whole = HomElem::block(&u.entries, Arc::clone(&sum), Arc::clone(&sum));
        let Some(inv) = inverse(&whole)? else {
            return Ok(None);
        };
        let entries = (0..k)
            .map(|i| (0..k).map(|j| inv.sub_block(&parts, &parts, i, j)).collect())
            .collect();
        Ok(Some(ElimMatrix { entries }))
    }
}

/// A matrix over `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElimMatrix {
    pub entries: Vec<Vec<HomElem>>,
}

impl ElimMatrix {
    pub fn new(entries: Vec<Vec<HomElem>>) -> Result<Self> {
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix".into()));
        }
        Ok(ElimMatrix { entries })
    }

    pub fn identity(ctx: &SplitContext, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ctx.e_one() } else { ctx.e_zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> HomElem) -> Self {
        ElimMatrix {
            entries: (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> &HomElem {
        &self.entries[i][j]
    }

    pub fn apply(&self, ctx: &SplitContext, g: &[HomElem]) -> Vec<HomElem> {
        self.entries.iter().map(|r| ctx.combine(r, g)).collect()
    }

    pub fn mul(&self, other: &ElimMatrix, ctx: &SplitContext) -> ElimMatrix {
        ElimMatrix::from_fn(self.rows(), other.cols(), |i, j| {
            (0..self.cols()).fold(ctx.e_zero(), |acc, l| {
                acc.add(&self.entries[i][l].compose(&other.entries[l][j]))
            })
        })
    }

    /// Whether column `targets[r]` is the `r`-th standard basis column.
    pub fn has_identity_at(&self, targets: &[usize]) -> bool {
        targets.iter().enumerate().all(|(r, &q)| {
            (0..self.rows()).all(|i| {
                let x = &self.entries[i][q];
                if i == r {
                    *x == HomElem::identity(Arc::clone(&x.to))
                } else {
                    x.is_zero()
                }
            })
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|r| serde_json::Value::Array(r.iter().map(HomElem::to_json).collect()))
                .collect(),
        )
    }
}

/// `matrix · g = column`, and `section` is a section of `column`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub matrix: ElimMatrix,
    pub column: Vec<HomElem>,
    pub section: Vec<HomElem>,
}

impl Certificate {
    /// Re-derives the column from `g` and checks the section by composition.
    pub fn verify(&self, ctx: &SplitContext, g: &[HomElem]) -> Result<()> {
        if self.matrix.cols() != g.len() {
            return Err(Error::Shape("certificate width differs from column".into()));
        }
        if self.matrix.apply(ctx, g) != self.column {
            return Err(Error::VerificationFailure("matrix does not produce the column".into()));
        }
        if !ctx.is_section(&self.column, &self.section) {
            return Err(Error::VerificationFailure("section does not split the column".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "matrix": self.matrix.to_json(),
            "column": self.column.iter().map(HomElem::to_json).collect::<Vec<_>>(),
            "section": self.section.iter().map(HomElem::to_json).collect::<Vec<_>>(),
        })
    }
}

/// A section of `f` from a witness `p, g` with `(p f) g = 1`: the section is
/// `g w` where `w` inverts `f g` (rings of stable rank one are Dedekind finite).
pub fn df_lift(ctx: &SplitContext, f: &HomElem, p: &HomElem, g: &HomElem) -> Result<HomElem> {
    let fg = f.compose(g);
    if p.compose(&fg) != ctx.e_one() {
        return Err(Error::WitnessInvalid("(p f) g is not the identity".into()));
    }
    let w = ctx.e_inverse(&fg)?;
    let h = g.compose(&w);
    if f.compose(&h) != ctx.e_one() {
        return Err(Error::VerificationFailure("lifted section does not split f".into()));
    }
    Ok(h)
}

/// Whether `δ(F)` is infinite, which happens exactly when `N = 0`.
pub fn delta_mu_guard(f: &HomGenSet) -> bool {
    f.to.is_zero()
}

/// Row-reduces `seed` so that column `targets[r]` becomes the `r`-th standard
/// basis column while `A g` stays split surjective.
///
/// Each step takes a section `z` of the current `A g`, uses a stable-rank-one
/// witness to make the pivot coefficient a unit, renormalizes the section, and
/// clears the pivot column with row operations that fix columns already placed.
pub fn place_identity(
    ctx: &SplitContext,
    g: &[HomElem],
    targets: &[usize],
    seed: &ElimMatrix,
) -> Result<Certificate> {
    let (n, m) = (g.len(), targets.len());
    if m == 0 || m > n || seed.rows() != m || seed.cols() != n {
        return Err(Error::Shape(format!(
            "place_identity: seed is {}x{}, column has {n} entries, {m} targets",
            seed.rows(),
            seed.cols()
        )));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n || std::mem::replace(&mut seen[t], true) {
            return Err(Error::Shape("targets must be distinct column indices".into()));
        }
    }
    let mut b = seed.entries.clone();
    let mut z = ctx
        .section(&seed.apply(ctx, g))?
        .ok_or_else(|| Error::PreconditionUnverified("seed · g is not split surjective".into()))?;
    let one = ctx.e_one();
    for (p, &q) in targets.iter().enumerate() {
        let placed = (0..m).all(|i| if i == p { b[i][q] == one } else { b[i][q].is_zero() });
        if placed {
            continue;
        }
        // Make row p read (..., 1 at q, d b_pj, ...) with (row p · g) z_p a unit.
        let alpha = g[q].compose(&z[p]);
        let beta = (0..n)
            .filter(|&j| j != q)
            .fold(ctx.e_zero(), |acc, j| acc.add(&b[p][j].compose(&g[j]).compose(&z[p])));
        let d = ctx.sr1(&alpha, &beta, Side::Left)?;
        let unit = alpha.add(&d.compose(&beta));
        let u = ctx.e_inverse(&unit)?;
        for j in 0..n {
            b[p][j] = if j == q { one.clone() } else { d.compose(&b[p][j]) };
        }
        z[p] = z[p].compose(&u);
        // Other rows still annihilate z_p; repair the remaining columns of Z.
        let xp = ctx.combine(&b[p], g);
        for l in (0..m).filter(|&l| l != p) {
            let t = xp.compose(&z[l]);
            z[l] = z[l].sub(&z[p].compose(&t));
        }
        // Clear column q outside row p; the inverse row operation acts on z_p.
        for i in (0..m).filter(|&i| i != p) {
            let c = b[i][q].clone();
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                b[i][j] = b[i][j].sub(&c.compose(&b[p][j]));
            }
            z[p] = z[p].add(&z[i].compose(&c));
        }
    }
    let matrix = ElimMatrix { entries: b };
    let cert = Certificate {
        column: matrix.apply(ctx, g),
        matrix,
        section: z,
    };
    cert.verify(ctx, g)?;
    if !cert.matrix.has_identity_at(targets) {
        return Err(Error::VerificationFailure("identity columns not in place".into()));
    }
    Ok(cert)
}

/// Given `g = U f` and a witness `C` that `C f` splits with `m` rows, returns
/// an `(m-k) x (n-k)` matrix `B` with `B (g_1, ..., g_{n-k})^T` split.
pub fn shorten(
    ctx: &SplitContext,
    g: &[HomElem],
    u: &ElimMatrix,
    witness: &ElimMatrix,
    k: usize,
) -> Result<Certificate> {
    let (n, m) = (g.len(), witness.rows());
    if n < 2 || m < 2 || m > n || k == 0 || k >= m {
        return Err(Error::Shape(format!(
            "shorten needs 2 <= m <= n and 1 <= k < m (n = {n}, m = {m}, k = {k})"
        )));
    }
    if witness.cols() != n || u.rows() != n || u.cols() != n {
        return Err(Error::Shape("shorten: matrix sizes do not match the column".into()));
    }
    let u_inv = ctx
        .matrix_inverse(u)?
        .ok_or_else(|| Error::PreconditionUnverified("U is not invertible over E".into()))?;
    let seed = witness.mul(&u_inv, ctx);
    let targets: Vec<usize> = (n - m..n).collect();
    let placed = place_identity(ctx, g, &targets, &seed)?;
    let matrix = ElimMatrix {
        entries: placed.matrix.entries[..m - k]
            .iter()
            .map(|r| r[..n - k].to_vec())
            .collect(),
    };
    let cert = Certificate {
        column: placed.column[..m - k].to_vec(),
        section: placed.section[..m - k].to_vec(),
        matrix,
    };
    cert.verify(ctx, &g[..n - k])?;
    Ok(cert)
}

#[cfg(test)]
mod tests;
