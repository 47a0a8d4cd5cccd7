use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::finmod::{hom_elements, FPModule};
use crate::linalg::Mat;
use crate::rings::{RingSpec, Value};

fn zmod_ctx(n: u64, rank_m: usize, rank_n: usize) -> SplitContext {
    let s = RingSpec::zmod(n).unwrap();
    let m = Arc::new(FPModule::free(s.clone(), rank_m).unwrap());
    let nn = Arc::new(FPModule::free(s, rank_n).unwrap());
    SplitContext::new(m, nn).unwrap()
}

fn mat(rows: &[&[u64]]) -> Mat {
    let cols = rows[0].len();
    Mat::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Value::Res(x)).collect())
            .collect(),
        cols,
    )
}

/// A map `M -> N` from its matrix.
fn hom(ctx: &SplitContext, rows: &[&[u64]]) -> HomElem {
    HomElem::new(Arc::clone(&ctx.m), Arc::clone(&ctx.n), mat(rows)).unwrap()
}

/// A map `N -> M` from its matrix.
fn back(ctx: &SplitContext, rows: &[&[u64]]) -> HomElem {
    HomElem::new(Arc::clone(&ctx.n), Arc::clone(&ctx.m), mat(rows)).unwrap()
}

fn endo(ctx: &SplitContext, rows: &[&[u64]]) -> HomElem {
    HomElem::new(Arc::clone(&ctx.n), Arc::clone(&ctx.n), mat(rows)).unwrap()
}

fn scalar(ctx: &SplitContext, x: u64) -> HomElem {
    endo(ctx, &[&[x]])
}

fn random_split_instance(
    ctx: &SplitContext,
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (Vec<HomElem>, ElimMatrix) {
    let homs = hom_elements(&ctx.m, &ctx.n, 100_000).unwrap();
    let ends = ctx.e.elements().unwrap();
    loop {
        let g: Vec<HomElem> = (0..n).map(|_| homs.choose(rng).unwrap().clone()).collect();
        let seed = ElimMatrix::from_fn(m, n, |_, _| ends.choose(rng).unwrap().clone());
        if ctx.section(&seed.apply(ctx, &g)).unwrap().is_some() {
            return (g, seed);
        }
    }
}

#[test]
fn df_lift_recovers_unit_section() {
    let ctx = zmod_ctx(6, 1, 1);
    let f = hom(&ctx, &[&[5]]);
    let h = df_lift(&ctx, &f, &scalar(&ctx, 5), &back(&ctx, &[&[1]])).unwrap();
    assert_eq!(h, back(&ctx, &[&[5]]));
}

#[test]
fn df_lift_through_automorphism() {
    let ctx = zmod_ctx(6, 2, 1);
    // projection onto the first coordinate after the automorphism (a, b) -> (a + b, b)
    let f = hom(&ctx, &[&[1, 1]]);
    let g = back(&ctx, &[&[1], &[0]]);
    let h = df_lift(&ctx, &f, &ctx.e_one(), &g).unwrap();
    assert_eq!(f.compose(&h), ctx.e_one());
    assert!(df_lift(&ctx, &f, &scalar(&ctx, 2), &g).is_err());
}

#[test]
fn delta_guard_detects_zero_target() {
    let s = RingSpec::zmod(6).unwrap();
    let zero = Arc::new(FPModule::zero(s.clone()).unwrap());
    let one = Arc::new(FPModule::free(s, 1).unwrap());
    let f = crate::finmod::hom_group(&one, &zero).unwrap();
    assert!(delta_mu_guard(&f));
    let f = crate::finmod::hom_group(&one, &one).unwrap();
    assert!(!delta_mu_guard(&f));
}

#[test]
fn place_identity_keeps_existing_identity_columns() {
    let ctx = zmod_ctx(2, 3, 1);
    let g = vec![
        hom(&ctx, &[&[1, 0, 0]]),
        hom(&ctx, &[&[0, 1, 0]]),
        hom(&ctx, &[&[0, 0, 1]]),
    ];
    let (o, l) = (ctx.e_zero(), ctx.e_one());
    let seed = ElimMatrix::new(vec![
        vec![o.clone(), l.clone(), o.clone()],
        vec![o.clone(), o.clone(), l.clone()],
    ])
    .unwrap();
    let cert = place_identity(&ctx, &g, &[1, 2], &seed).unwrap();
    assert_eq!(cert.matrix, seed);
}

#[test]
fn place_identity_small_example() {
    let ctx = zmod_ctx(4, 1, 1);
    let g = vec![hom(&ctx, &[&[2]]), hom(&ctx, &[&[1]])];
    let seed = ElimMatrix::new(vec![vec![ctx.e_zero(), ctx.e_one()]]).unwrap();
    let cert = place_identity(&ctx, &g, &[0], &seed).unwrap();
    assert_eq!(cert.matrix.entries[0], vec![ctx.e_one(), ctx.e_one()]);
    assert_eq!(cert.column[0], hom(&ctx, &[&[3]]));
}

#[test]
fn place_identity_rejects_unsplit_seed() {
    let ctx = zmod_ctx(4, 1, 1);
    let g = vec![hom(&ctx, &[&[2]]), hom(&ctx, &[&[1]])];
    let seed = ElimMatrix::new(vec![vec![ctx.e_one(), ctx.e_zero()]]).unwrap();
    assert!(matches!(
        place_identity(&ctx, &g, &[0], &seed),
        Err(Error::PreconditionUnverified(_))
    ));
}

#[test]
fn place_identity_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n_mod, rm, rn) in [(6, 2, 1), (4, 2, 1), (2, 2, 2), (2, 4, 2), (12, 1, 1)] {
        let ctx = zmod_ctx(n_mod, rm, rn);
        for trial in 0..6 {
            let n = 2 + trial % 3;
            // M -> N^m can only split when M is at least as large as N^m.
            let m = 1 + trial % n.min(rm / rn);
            let (g, seed) = random_split_instance(&ctx, &mut rng, n, m);
            let mut cols: Vec<usize> = (0..n).collect();
            cols.shuffle(&mut rng);
            let targets = &cols[..m];
            let cert = place_identity(&ctx, &g, targets, &seed).unwrap();
            cert.verify(&ctx, &g).unwrap();
            assert!(cert.matrix.has_identity_at(targets));
        }
    }
}

#[test]
fn shorten_two_projections() {
    let ctx = zmod_ctx(6, 2, 1);
    let g = vec![hom(&ctx, &[&[1, 0]]), hom(&ctx, &[&[0, 1]])];
    let id = ElimMatrix::identity(&ctx, 2);
    let cert = shorten(&ctx, &g, &id, &id, 1).unwrap();
    assert_eq!((cert.matrix.rows(), cert.matrix.cols()), (1, 1));
    cert.verify(&ctx, &g[..1]).unwrap();
}

#[test]
fn shorten_through_unimodular_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ctx = zmod_ctx(6, 3, 1);
    let (f, witness) = random_split_instance(&ctx, &mut rng, 3, 2);
    let (o, l) = (ctx.e_zero(), ctx.e_one());
    let two = scalar(&ctx, 2);
    let u = ElimMatrix::new(vec![
        vec![l.clone(), two.clone(), o.clone()],
        vec![o.clone(), l.clone(), o.clone()],
        vec![two.clone(), o.clone(), scalar(&ctx, 5)],
    ])
    .unwrap();
    let g = u.apply(&ctx, &f);
    let cert = shorten(&ctx, &g, &u, &witness, 1).unwrap();
    cert.verify(&ctx, &g[..2]).unwrap();
}

#[test]
fn special_section_example() {
    let ctx = zmod_ctx(6, 1, 1);
    let (e, f, h) = (scalar(&ctx, 3), hom(&ctx, &[&[4]]), hom(&ctx, &[&[5]]));
    let w = Some((scalar(&ctx, 1), back(&ctx, &[&[1]])));
    let out = special_section(&ctx, &e, &f, &h, w, Some(back(&ctx, &[&[5]]))).unwrap();
    assert!(out.d.is_zero());
    assert_eq!(out.z, back(&ctx, &[&[1]]));
    assert_eq!(out.u, scalar(&ctx, 5));
}

#[test]
fn special_section_searches_witnesses() {
    let ctx = zmod_ctx(2, 2, 2);
    let e = endo(&ctx, &[&[1, 0], &[0, 0]]);
    let f = hom(&ctx, &[&[0, 0], &[1, 1]]);
    let h = hom(&ctx, &[&[1, 0], &[0, 1]]);
    let out = special_section(&ctx, &e, &f, &h, None, None).unwrap();
    assert_eq!(e.compose(&out.y).add(&f.compose(&out.z)), ctx.e_one());
    assert!(ctx.e.is_unit(&h.compose(&out.z)));
}

#[test]
fn special_section_rejects_bad_witness() {
    let ctx = zmod_ctx(6, 1, 1);
    let (e, f, h) = (scalar(&ctx, 3), hom(&ctx, &[&[4]]), hom(&ctx, &[&[5]]));
    let w = Some((scalar(&ctx, 0), back(&ctx, &[&[1]])));
    assert!(matches!(
        special_section(&ctx, &e, &f, &h, w, None),
        Err(Error::WitnessInvalid(_))
    ));
}

#[test]
fn replacement_single_row() {
    let ctx = zmod_ctx(6, 1, 1);
    let g = vec![hom(&ctx, &[&[3]]), hom(&ctx, &[&[2]])];
    let seed = ElimMatrix::new(vec![vec![ctx.e_one(), ctx.e_one()]]).unwrap();
    let y_row = vec![ctx.e_one(), ctx.e_one()];
    let cert = replacement(&ctx, &g, &seed, &y_row, None).unwrap();
    assert_eq!(cert.column, vec![hom(&ctx, &[&[5]])]);
    assert_eq!(cert.section, vec![back(&ctx, &[&[5]])]);
}

#[test]
fn replacement_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (n_mod, rm, rn) in [(6, 2, 1), (2, 4, 2), (4, 2, 1)] {
        let ctx = zmod_ctx(n_mod, rm, rn);
        let ends = ctx.e.elements().unwrap();
        let mut done = 0;
        while done < 4 {
            let (g, seed) = random_split_instance(&ctx, &mut rng, 3, 2);
            let mut y_row = vec![ctx.e_one(), ctx.e_zero(), ends.choose(&mut rng).unwrap().clone()];
            if ctx.section(&[ctx.combine(&y_row, &g)]).unwrap().is_none() {
                y_row[2] = ctx.e_zero();
                if ctx.section(&[g[0].clone()]).unwrap().is_none() {
                    continue;
                }
            }
            let cert = replacement(&ctx, &g, &seed, &y_row, None).unwrap();
            assert_eq!(cert.matrix.entries[0], y_row);
            assert_eq!(cert.matrix.entries[1][0], ctx.e_zero());
            assert_eq!(cert.matrix.entries[1][1], ctx.e_one());
            done += 1;
        }
    }
}

#[test]
fn badsc_on_zmod6() {
    let r = RingSpec::zmod(6).unwrap();
    let w = badsc_witness(&r, &Value::Res(3), &Value::Res(4), &Value::Res(3), Default::default())
        .unwrap();
    assert_eq!(w.d, Value::Res(3));
    assert_eq!(w.v, Value::Res(1));
    assert_eq!((w.e, w.f, w.g, w.h), (Value::Res(1), Value::Res(1), Value::Res(1), Value::Res(1)));
    assert!(w.exhaustive);
}

#[test]
fn badsc_with_unit_b() {
    let r = RingSpec::zmod(6).unwrap();
    let z = Value::Res(0);
    let w = badsc_witness(&r, &z, &Value::Res(1), &z, Default::default()).unwrap();
    assert_eq!(w.d, z);
}

#[test]
fn badsc_on_matrices_over_f2() {
    let r = RingSpec::matrix(RingSpec::zmod(2).unwrap(), 2).unwrap();
    let (e11, e22) = (r.matrix_unit(1, 1), r.matrix_unit(2, 2));
    let w = badsc_witness(&r, &e22, &e11, &e22, Default::default()).unwrap();
    assert_eq!(w.d, e22);
    assert_eq!(w.v, r.one());
}

/// Every admissible triple of a finite ring yields a working `d`.
fn badsc_exhaustive(r: &RingSpec) -> usize {
    let all = r.elements().unwrap();
    let mut admissible = 0;
    for a in &all {
        for b in &all {
            if r.right_unimodular_witness(a, b).unwrap().is_none() {
                continue;
            }
            for c in &all {
                if r.left_unimodular_witness(b, c).unwrap().is_none() {
                    continue;
                }
                admissible += 1;
                badsc_witness(r, a, b, c, Default::default()).unwrap();
            }
        }
    }
    admissible
}

#[test]
fn badsc_exhaustive_zmod6() {
    assert!(badsc_exhaustive(&RingSpec::zmod(6).unwrap()) > 0);
}

#[test]
fn badsc_exhaustive_matrices_over_f2() {
    let r = RingSpec::matrix(RingSpec::zmod(2).unwrap(), 2).unwrap();
    assert!(badsc_exhaustive(&r) > 0);
}

#[test]
fn badsc_rejects_non_unimodular_pair() {
    let r = RingSpec::zmod(6).unwrap();
    let err = badsc_witness(&r, &Value::Res(2), &Value::Res(4), &Value::Res(1), Default::default());
    assert!(matches!(err, Err(Error::HypothesisFailure(_))));
}

#[test]
fn split_form_example() {
    let ctx = zmod_ctx(6, 1, 1);
    let (e, f, g) = (scalar(&ctx, 3), hom(&ctx, &[&[4]]), hom(&ctx, &[&[5]]));
    let out = split_form_witness(&ctx, &e, &f, &g, (&ctx.e_zero(), &ctx.e_one()), None).unwrap();
    for s in [1, 5] {
        let x = f.add(&e.compose(&out.d).compose(&scalar(&ctx, s)).compose(&g)).compose(&out.z);
        assert!(ctx.e.is_unit(&x));
    }
    assert_eq!(f.add(&e.compose(&out.d).compose(&g)).compose(&out.z), ctx.e_one());
}

#[test]
fn split_form_with_zero_g() {
    let ctx = zmod_ctx(6, 2, 1);
    let f = hom(&ctx, &[&[1, 0]]);
    let out = split_form_witness(
        &ctx,
        &scalar(&ctx, 0),
        &f,
        &ctx.hom_zero(),
        (&ctx.e_one(), &ctx.e_zero()),
        None,
    )
    .unwrap();
    assert_eq!(f.compose(&out.z), ctx.e_one());
}

/// `g_1 = (3, 2)` is not split over `Z/6` on its own, so `e = 1` is used to
/// make `(e, g_1)` split.
fn rows_instance() -> (SplitContext, Vec<HomElem>, ElimMatrix) {
    let ctx = zmod_ctx(6, 2, 1);
    let g = vec![
        hom(&ctx, &[&[3, 2]]),
        hom(&ctx, &[&[2, 0]]),
        hom(&ctx, &[&[1, 3]]),
        hom(&ctx, &[&[0, 1]]),
    ];
    let (o, l) = (ctx.e_zero(), ctx.e_one());
    let witness = ElimMatrix::new(vec![
        vec![o.clone(), o.clone(), l.clone(), o.clone()],
        vec![o.clone(), o.clone(), o.clone(), l.clone()],
    ])
    .unwrap();
    (ctx, g, witness)
}

#[test]
fn rows_with_constant_chooser() {
    let (ctx, g, witness) = rows_instance();
    let e = ctx.e_one();
    let one = ctx.e_one();
    let out = rows_procedure(&ctx, &g, &witness, &e, &mut |_, _| one.clone()).unwrap();
    assert_eq!(out.c.len(), 2);
    assert_eq!(out.column.len(), 3);
    out.certificate.verify(&ctx, &out.column).unwrap();
}

#[test]
fn rows_single_row_base_case() {
    let ctx = zmod_ctx(6, 1, 1);
    let g = vec![hom(&ctx, &[&[3]]), hom(&ctx, &[&[2]])];
    let witness = ElimMatrix::new(vec![vec![ctx.e_one(), ctx.e_one()]]).unwrap();
    let e = scalar(&ctx, 1);
    let out = rows_procedure(&ctx, &g, &witness, &e, &mut |_, _| scalar(&ctx, 5)).unwrap();
    assert_eq!(out.certificate.matrix.cols(), 1);
    assert!(ctx.section(&out.column).unwrap().is_some());
}

#[test]
fn rows_every_reply_sequence_verifies() {
    let (ctx, g, witness) = rows_instance();
    let e = ctx.e_one();
    let units = ctx.e.central_units().unwrap();
    for s1 in &units {
        for s2 in &units {
            let replies = [s1.clone(), s2.clone()];
            let out = rows_procedure(&ctx, &g, &witness, &e, &mut |i, _| replies[i].clone())
                .unwrap();
            assert_eq!(out.s, replies.to_vec());
            out.certificate.verify(&ctx, &out.column).unwrap();
        }
    }
}

#[test]
fn rows_rejects_non_central_reply() {
    let (ctx, g, witness) = rows_instance();
    let e = ctx.e_one();
    let bad = scalar(&ctx, 2);
    let err = rows_procedure(&ctx, &g, &witness, &e, &mut |_, _| bad.clone());
    assert_eq!(err.unwrap_err(), Error::ChooserReturnedNonCentralUnit);
}

#[test]
fn rows_over_noncommutative_endomorphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ctx = zmod_ctx(2, 2, 2);
    let units = ctx.e.central_units().unwrap();
    let mut done = 0;
    while done < 3 {
        let (g, witness) = random_split_instance(&ctx, &mut rng, 3, 1);
        let e = ctx.e_one();
        let out = rows_procedure(&ctx, &g, &witness, &e, &mut |_, _| units[0].clone()).unwrap();
        out.certificate.verify(&ctx, &out.column).unwrap();
        done += 1;
    }
}
