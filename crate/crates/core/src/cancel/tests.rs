use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::finmod::iso_oracle;
use crate::rings::Ring;

fn zmod(n: u64) -> RingSpec {
    RingSpec::zmod(n).unwrap()
}

fn free(s: &RingSpec, r: usize) -> Arc<FPModule> {
    Arc::new(FPModule::free(s.clone(), r).unwrap())
}

fn cyclic(s: &RingSpec, d: u64) -> Arc<FPModule> {
    Arc::new(FPModule::from_invariants(s.clone(), &[Value::Res(d)]).unwrap())
}

fn res_hom(m: &Arc<FPModule>, n: &Arc<FPModule>, rows: &[&[u64]]) -> HomElem {
    let mat = Mat::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| Value::Res(x)).collect()).collect(),
        rows[0].len(),
    );
    HomElem::new(Arc::clone(m), Arc::clone(n), mat).unwrap()
}

fn int_hom(m: &Arc<FPModule>, n: &Arc<FPModule>, rows: &[&[i64]]) -> HomElem {
    let mat = Mat::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Value::Int(BigInt::from(x))).collect())
            .collect(),
        rows[0].len(),
    );
    HomElem::new(Arc::clone(m), Arc::clone(n), mat).unwrap()
}

fn random_automorphism(x: &Arc<FPModule>, rng: &mut ChaCha8Rng) -> HomElem {
    let base = &x.base;
    let elems = base.elements().unwrap();
    loop {
        let mat = Mat::from_fn(x.gens, x.gens, |_, _| elems[rng.gen_range(0..elems.len())].clone());
        if let Ok(h) = HomElem::new(Arc::clone(x), Arc::clone(x), mat) {
            if inverse(&h).unwrap().is_some() {
                return h;
            }
        }
    }
}

fn sum(a: &Arc<FPModule>, b: &Arc<FPModule>) -> Arc<FPModule> {
    Arc::new(FPModule::direct_sum(&[a, b]).unwrap())
}

#[test]
fn main_lemma_over_z6() {
    let s = zmod(6);
    let one = free(&s, 1);
    let f = vec![res_hom(&one, &one, &[&[3]]), res_hom(&one, &one, &[&[2]])];
    let e = HomElem::identity(Arc::clone(&one));
    let step = main_lemma_step(&f, &e, 10).unwrap();
    let h = &step.column[0];
    assert!(s.is_unit(h.mat.get(0, 0)));
    let d = step.d[0].mat.get(0, 0).clone();
    assert!([1, 2, 4, 5].contains(&match d {
        Value::Res(x) => x,
        _ => unreachable!(),
    }));
}

#[test]
fn main_lemma_accepts_split_first_entry() {
    let s = zmod(6);
    let one = free(&s, 1);
    let f = vec![res_hom(&one, &one, &[&[1]]), res_hom(&one, &one, &[&[1]])];
    let e = HomElem::zero(Arc::clone(&one), Arc::clone(&one));
    let step = main_lemma_step(&f, &e, 10).unwrap();
    assert!(s.is_unit(step.column[0].mat.get(0, 0)));
}

#[test]
fn main_lemma_over_integers() {
    let z = RingSpec::Integers;
    let (m, n) = (free(&z, 2), free(&z, 1));
    let f = vec![
        int_hom(&m, &n, &[&[2, 0]]),
        int_hom(&m, &n, &[&[0, 3]]),
        int_hom(&m, &n, &[&[1, 1]]),
    ];
    let e = HomElem::identity(Arc::clone(&n));
    let step = main_lemma_step(&f, &e, 10).unwrap();
    assert_eq!(step.column.len(), 2);
    assert!(x_split_check(&family(&step.column).unwrap()).unwrap());
}

#[test]
fn main_lemma_rejects_unsplit_column() {
    let s = zmod(4);
    let one = free(&s, 1);
    let f = vec![res_hom(&one, &one, &[&[2]]), res_hom(&one, &one, &[&[2]])];
    let e = HomElem::identity(Arc::clone(&one));
    assert!(matches!(main_lemma_step(&f, &e, 10), Err(Error::HypothesisFailure(_))));
}

fn scenario(
    k: &Arc<FPModule>,
    l: &Arc<FPModule>,
    m: &Arc<FPModule>,
    n: &Arc<FPModule>,
    iso: HomElem,
) -> Scenario {
    let f = hom_group(m, n).unwrap();
    Scenario::new(
        Arc::clone(k),
        Arc::clone(l),
        Arc::clone(m),
        Arc::clone(n),
        iso,
        f,
        None,
    )
    .unwrap()
}

#[test]
fn identity_iso_cancels_to_identity() {
    let s = zmod(6);
    let (n, m) = (free(&s, 1), free(&s, 2));
    let nm = sum(&n, &m);
    let sc = scenario(&n, &m, &m, &n, HomElem::identity(nm));
    let r = cancel_iso(&sc, 10).unwrap();
    assert!(r.verify());
    assert_eq!(r.iso_lm, HomElem::identity(Arc::clone(&m)));
}

#[test]
fn scrambled_iso_over_z4() {
    let s = zmod(4);
    let n = free(&s, 1);
    let m = sum(&n, &cyclic(&s, 2));
    let nm = sum(&n, &m);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let a = random_automorphism(&nm, &mut rng);
        let b = random_automorphism(&nm, &mut rng);
        let sc = scenario(&n, &m, &m, &n, a.compose(&b));
        let r = cancel_iso(&sc, 10).unwrap();
        assert!(r.verify());
        assert!(iso_oracle(&m, &m).unwrap().is_some());
    }
}

#[test]
fn integer_scenario_gives_unimodular_block() {
    let z = RingSpec::Integers;
    let (n, m) = (free(&z, 1), free(&z, 2));
    let nm = sum(&n, &m);
    let iso = int_hom(&nm, &nm, &[&[1, 2, 3], &[0, 1, 4], &[5, 6, 0]]);
    let sc = scenario(&n, &m, &m, &n, iso);
    let r = cancel_iso(&sc, 10).unwrap();
    assert!(r.verify());
    let u = r.iso_lm.user_matrix();
    let v = |i, j| match u.get(i, j) {
        Value::Int(x) => x.clone(),
        _ => unreachable!(),
    };
    let det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
    assert!(det == BigInt::from(1) || det == BigInt::from(-1));
}

#[test]
fn summand_reduction_with_two_copies() {
    let s = zmod(6);
    let n = free(&s, 1);
    let k = free(&s, 2);
    let m = free(&s, 2);
    let km = sum(&k, &m);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let iso = random_automorphism(&km, &mut rng);
    let id = HomElem::identity(Arc::clone(&k));
    let sc = Scenario::new(
        Arc::clone(&k),
        Arc::clone(&m),
        Arc::clone(&m),
        Arc::clone(&n),
        iso,
        hom_group(&m, &n).unwrap(),
        Some(SummandWitness {
            inclusion: id.clone(),
            projection: id,
            copies: 2,
        }),
    )
    .unwrap();
    let r = cancel_iso(&sc, 10).unwrap();
    assert!(r.verify());
    assert!(r.transcript.iter().any(|t| t.step == "summand-reduction"));
}

#[test]
fn condition_three_failure_is_named() {
    let s = zmod(4);
    let (n, m) = (free(&s, 1), free(&s, 2));
    let f = HomGenSet::new(Arc::clone(&m), Arc::clone(&n), vec![res_hom(&m, &n, &[&[2, 0]])]).unwrap();
    let sc = Scenario::new(
        Arc::clone(&n),
        Arc::clone(&m),
        Arc::clone(&m),
        Arc::clone(&n),
        HomElem::identity(sum(&n, &m)),
        f,
        None,
    )
    .unwrap();
    match cancel_iso(&sc, 10) {
        Err(Error::HypothesisFailure(msg)) => assert!(msg.contains("condition (3)")),
        other => panic!("expected a hypothesis failure, got {other:?}"),
    }
}

#[test]
fn assemble_f_examples() {
    let s = zmod(6);
    let (n, p) = (free(&s, 1), free(&s, 2));
    let f = assemble_f(&p, &n, None).unwrap();
    assert_eq!(f.homs.len(), 2);
    assert_eq!(condition_three(&f).unwrap(), None);

    let s = zmod(12);
    let n = cyclic(&s, 4);
    let p = sum(&n, &cyclic(&s, 3));
    let f = assemble_f(&p, &n, None).unwrap();
    assert_eq!(f.homs.len(), 1);
    assert!(delta_local(&f, &SpecPoint::maximal(2), 1).unwrap().0.at_least(1));

    let f = assemble_f(&n, &n, None).unwrap();
    assert_eq!(condition_three(&f).unwrap(), None);
}

fn corollary_data(s: &RingSpec, p: Arc<FPModule>, seed: u64) -> CorollaryData {
    let n = free(s, 1);
    let m = Arc::clone(&p);
    let nm = sum(&n, &m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iso = random_automorphism(&nm, &mut rng);
    CorollaryData {
        k: Arc::clone(&n),
        l: Arc::clone(&m),
        m,
        n,
        p,
        iso,
        p_summand: None,
        k_summand: None,
    }
}

#[test]
fn corollaries_pass_on_free_rank_two() {
    let s = zmod(12);
    let d = corollary_data(&s, free(&s, 2), 11);
    for report in [check_gen_bass(&d, 10), check_gen_dspy(&d, 10)] {
        assert!(report.passed(), "{:?}", report.conditions);
        assert!(report.cancellation.unwrap().unwrap().verify());
    }
}

#[test]
fn corollaries_name_missing_local_summand() {
    let s = zmod(12);
    // at (2) the module Z/2 has no summand Z/4
    let p = sum(&cyclic(&s, 2), &cyclic(&s, 3));
    let d = corollary_data(&s, p, 5);
    for report in [check_gen_bass(&d, 10), check_gen_dspy(&d, 10)] {
        assert_eq!(report.failing(), vec!["(3)"]);
        assert!(report.cancellation.is_none());
    }
}

#[test]
fn integer_corollary_rank_check() {
    let z = RingSpec::Integers;
    let n = free(&z, 1);
    let m = free(&z, 2);
    let nm = sum(&n, &m);
    let d = CorollaryData {
        k: Arc::clone(&n),
        l: Arc::clone(&m),
        m: Arc::clone(&m),
        n,
        p: m,
        iso: int_hom(&nm, &nm, &[&[1, 2, 0], &[0, 1, 0], &[3, 0, 1]]),
        p_summand: None,
        k_summand: None,
    };
    let r = check_gen_dspy(&d, 10);
    assert!(r.passed());
    assert!(r.cancellation.unwrap().unwrap().verify());
}
