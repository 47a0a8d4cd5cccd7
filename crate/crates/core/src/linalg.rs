//! Dense matrices over the ring backends, with diagonalization and linear
//! solving over principal ideal rings.

use std::fmt;

use crate::rings::{Ring, RingError, RingSpec, Value};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Value>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(ring: &RingSpec, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &RingSpec, n: usize) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Value>>, cols: usize) -> Mat {
        let r = rows.len();
        let data: Vec<Value> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * cols, "ragged matrix");
        Mat { rows: r, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Value) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Value {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Value) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Value> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, ring: &RingSpec, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = ring.zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ring.is_zero(a) {
                    continue;
                }
                acc = ring.add(&acc, &ring.mul(a, other.get(k, j)));
            }
            acc
        })
    }

    pub fn add(&self, ring: &RingSpec, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            ring.add(self.get(i, j), other.get(i, j))
        })
    }

    pub fn neg(&self, ring: &RingSpec) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| ring.neg(x)).collect(),
        }
    }

    pub fn is_zero(&self, ring: &RingSpec) -> bool {
        self.data.iter().all(|x| ring.is_zero(x))
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn hstack(parts: &[&Mat]) -> Mat {
        let rows = parts[0].rows;
        let cols = parts.iter().map(|m| m.cols).sum();
        Mat::from_fn(rows, cols, |i, mut j| {
            for m in parts {
                if j < m.cols {
                    return m.get(i, j).clone();
                }
                j -= m.cols;
            }
            unreachable!()
        })
    }

    pub fn vstack(parts: &[&Mat]) -> Mat {
        let cols = parts[0].cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            assert_eq!(m.cols, cols);
            data.extend(m.data.iter().cloned());
            rows += m.rows;
        }
        Mat { rows, cols, data }
    }

    pub fn block_diag(ring: &RingSpec, parts: &[&Mat]) -> Mat {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zeros(ring, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in parts {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    out.set(r0 + i, c0 + j, m.get(i, j).clone());
                }
            }
            r0 += m.rows;
            c0 += m.cols;
        }
        out
    }

    fn row_axpy(&mut self, ring: &RingSpec, dst: usize, c: &Value, src: usize) {
        for j in 0..self.cols {
            let v = ring.add(self.get(dst, j), &ring.mul(c, self.get(src, j)));
            self.set(dst, j, v);
        }
    }

    fn col_axpy(&mut self, ring: &RingSpec, dst: usize, c: &Value, src: usize) {
        for i in 0..self.rows {
            let v = ring.add(self.get(i, dst), &ring.mul(self.get(i, src), c));
            self.set(i, dst, v);
        }
    }

    /// Rows `(i, j)` become `(s*ri + t*rj, u*ri + v*rj)`.
    fn row_mix(&mut self, ring: &RingSpec, i: usize, j: usize, m: [&Value; 4]) {
        let [s, t, u, v] = m;
        for k in 0..self.cols {
            let (a, b) = (self.get(i, k).clone(), self.get(j, k).clone());
            self.set(i, k, ring.add(&ring.mul(s, &a), &ring.mul(t, &b)));
            self.set(j, k, ring.add(&ring.mul(u, &a), &ring.mul(v, &b)));
        }
    }

    /// Columns `(i, j)` become `(s*ci + t*cj, u*ci + v*cj)`.
    fn col_mix(&mut self, ring: &RingSpec, i: usize, j: usize, m: [&Value; 4]) {
        let [s, t, u, v] = m;
        for k in 0..self.rows {
            let (a, b) = (self.get(k, i).clone(), self.get(k, j).clone());
            self.set(k, i, ring.add(&ring.mul(&a, s), &ring.mul(&b, t)));
            self.set(k, j, ring.add(&ring.mul(&a, u), &ring.mul(&b, v)));
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.rows {
            self.data.swap(k * self.cols + i, k * self.cols + j);
        }
    }

    fn scale_row(&mut self, ring: &RingSpec, i: usize, c: &Value) {
        for k in 0..self.cols {
            let v = ring.mul(c, self.get(i, k));
            self.set(i, k, v);
        }
    }

    /// Determinant by cofactor expansion (commutative base, small sizes).
    pub fn det(&self, ring: &RingSpec) -> Value {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return ring.one();
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        // Gaussian elimination is not available over a general PIR, so expand
        // along the first row.
        let mut acc = ring.zero();
        for c in 0..n {
            let a = self.get(0, c);
            if ring.is_zero(a) {
                continue;
            }
            let cols: Vec<usize> = (0..n).filter(|&k| k != c).collect();
            let minor = self.block(1, n, 0, n).select_cols(&cols);
            let term = ring.mul(a, &minor.det(ring));
            acc = if c % 2 == 0 {
                ring.add(&acc, &term)
            } else {
                ring.sub(&acc, &term)
            };
        }
        acc
    }
}

/// `U * A * V = D` with `U`, `V` invertible and `D` diagonal with each
/// normalized diagonal entry dividing the next.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub u: Mat,
    pub v: Mat,
    pub v_inv: Mat,
    /// Diagonal entries, length `min(rows, cols)`.
    pub diag: Vec<Value>,
}

pub fn diagonalize(ring: &RingSpec, a: &Mat) -> Result<Diagonalization, RingError> {
    if !ring.is_pir() {
        return Err(RingError::Unsupported(format!(
            "diagonalization over {}",
            ring.short_name()
        )));
    }
    let (r, c) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut u = Mat::identity(ring, r);
    let mut v = Mat::identity(ring, c);
    let mut v_inv = Mat::identity(ring, c);
    let n = r.min(c);
    for t in 0..n {
        // pivot: nonzero entry generating the largest ideal
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                let x = m.get(i, j);
                if ring.is_zero(x) {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| ring.ideal_key(x) < ring.ideal_key(m.get(bi, bj))) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap_rows(t, pi);
        u.swap_rows(t, pi);
        m.swap_cols(t, pj);
        v.swap_cols(t, pj);
        v_inv.swap_rows(t, pj);
        loop {
            let mut changed = false;
            for i in t + 1..r {
                let x = m.get(i, t).clone();
                if ring.is_zero(&x) {
                    continue;
                }
                let p = m.get(t, t).clone();
                if let Some(q) = ring.divide(&p, &x) {
                    let nq = ring.neg(&q);
                    m.row_axpy(ring, i, &nq, t);
                    u.row_axpy(ring, i, &nq, t);
                } else {
                    let (_, s, tt, uu, vv) = ring.gcdex(&p, &x)?;
                    m.row_mix(ring, t, i, [&s, &tt, &uu, &vv]);
                    u.row_mix(ring, t, i, [&s, &tt, &uu, &vv]);
                    changed = true;
                }
            }
            for j in t + 1..c {
                let x = m.get(t, j).clone();
                if ring.is_zero(&x) {
                    continue;
                }
                let p = m.get(t, t).clone();
                if let Some(q) = ring.divide(&p, &x) {
                    let nq = ring.neg(&q);
                    m.col_axpy(ring, j, &nq, t);
                    v.col_axpy(ring, j, &nq, t);
                    // inverse: row_t of v_inv += q * row_j
                    v_inv.row_axpy(ring, t, &q, j);
                } else {
                    let (_, s, tt, uu, vv) = ring.gcdex(&p, &x)?;
                    m.col_mix(ring, t, j, [&s, &tt, &uu, &vv]);
                    v.col_mix(ring, t, j, [&s, &tt, &uu, &vv]);
                    // column mix by E = [[s, u], [t, v]] on (t, j); apply E^{-1} on rows
                    let det = ring.sub(&ring.mul(&s, &vv), &ring.mul(&tt, &uu));
                    let di = ring.try_inverse(&det).expect("gcdex matrix is invertible");
                    let a11 = ring.mul(&di, &vv);
                    let a12 = ring.neg(&ring.mul(&di, &uu));
                    let a21 = ring.neg(&ring.mul(&di, &tt));
                    let a22 = ring.mul(&di, &s);
                    v_inv.row_mix(ring, t, j, [&a11, &a12, &a21, &a22]);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // pivot must divide the remaining block
            let p = m.get(t, t).clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !ring.divides(&p, m.get(i, j))));
            match bad {
                Some(i) => {
                    let one = ring.one();
                    m.row_axpy(ring, t, &one, i);
                    u.row_axpy(ring, t, &one, i);
                }
                None => break,
            }
        }
        let (_, unit) = ring.normalize(m.get(t, t))?;
        m.scale_row(ring, t, &unit);
        u.scale_row(ring, t, &unit);
    }
    let diag = (0..n).map(|i| m.get(i, i).clone()).collect();
    Ok(Diagonalization { u, v, v_inv, diag })
}

/// Some `x` with `A x = b`, or `None` if the system is inconsistent.
/// Smith normal form over the integers: `u * a * v = d` with `u`, `v`
/// unimodular and the diagonal of `d` nonnegative and successively dividing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SNFResult {
    pub u: Mat,
    pub v: Mat,
    pub d: Mat,
}

pub fn snf(a: &Mat) -> Result<SNFResult, RingError> {
    let ring = RingSpec::Integers;
    let dg = diagonalize(&ring, a)?;
    let d = Mat::from_fn(a.rows, a.cols, |i, j| {
        if i == j {
            dg.diag[i].clone()
        } else {
            ring.zero()
        }
    });
    if dg.u.mul(&ring, a).mul(&ring, &dg.v) != d {
        return Err(RingError::Invalid("Smith form does not reproduce the matrix".into()));
    }
    Ok(SNFResult { u: dg.u, v: dg.v, d })
}

pub fn solve(ring: &RingSpec, a: &Mat, b: &[Value]) -> Result<Option<Vec<Value>>, RingError> {
    assert_eq!(a.rows, b.len());
    let d = diagonalize(ring, a)?;
    let bm = Mat {
        rows: b.len(),
        cols: 1,
        data: b.to_vec(),
    };
    let ub = d.u.mul(ring, &bm);
    let mut y = vec![ring.zero(); a.cols];
    for i in 0..a.rows {
        let ci = ub.get(i, 0);
        if i < d.diag.len() {
            match ring.divide(&d.diag[i], ci) {
                Some(q) => y[i] = q,
                None => return Ok(None),
            }
        } else if !ring.is_zero(ci) {
            return Ok(None);
        }
    }
    let ym = Mat {
        rows: a.cols,
        cols: 1,
        data: y,
    };
    Ok(Some(d.v.mul(ring, &ym).data))
}

/// Inverse of a square matrix over a commutative backend, if it exists.
pub fn inverse(ring: &RingSpec, a: &Mat) -> Result<Option<Mat>, RingError> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![ring.zero(); n];
        e[j] = ring.one();
        match solve(ring, a, &e)? {
            Some(x) => cols.push(x),
            None => return Ok(None),
        }
    }
    let inv = Mat::from_fn(n, n, |i, j| cols[j][i].clone());
    // a right inverse of a square matrix over a commutative ring is two-sided
    Ok(Some(inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zm(n: u64, rows: usize, cols: usize, data: &[u64]) -> Mat {
        let _ = n;
        Mat {
            rows,
            cols,
            data: data.iter().map(|&x| Value::Res(x)).collect(),
        }
    }

    fn check(ring: &RingSpec, a: &Mat) {
        let d = diagonalize(ring, a).unwrap();
        let prod = d.u.mul(ring, a).mul(ring, &d.v);
        for i in 0..a.rows {
            for j in 0..a.cols {
                let want = if i == j { d.diag[i].clone() } else { ring.zero() };
                assert_eq!(prod.get(i, j), &want, "entry ({i},{j}) of {a:?}");
            }
        }
        let vv = d.v.mul(ring, &d.v_inv);
        assert_eq!(vv, Mat::identity(ring, a.cols));
        assert!(ring.is_unit(&d.u.det(ring)));
        for w in d.diag.windows(2) {
            assert!(ring.divides(&w[0], &w[1]));
        }
    }

    #[test]
    fn integer_diagonal_2_3() {
        let z = RingSpec::Integers;
        let a = Mat::from_rows(
            vec![
                vec![Value::Int(2.into()), Value::Int(0.into())],
                vec![Value::Int(0.into()), Value::Int(3.into())],
            ],
            2,
        );
        let d = diagonalize(&z, &a).unwrap();
        assert_eq!(d.diag, vec![Value::Int(1.into()), Value::Int(6.into())]);
        check(&z, &a);
    }

    #[test]
    fn zmod_examples() {
        let r = RingSpec::zmod(12).unwrap();
        check(&r, &zm(12, 2, 3, &[4, 6, 2, 8, 3, 9]));
        check(&r, &zm(12, 3, 2, &[0, 0, 0, 0, 0, 0]));
        let d = diagonalize(&r, &zm(12, 1, 2, &[4, 6])).unwrap();
        assert_eq!(d.diag, vec![Value::Res(2)]);
    }

    #[test]
    fn solve_finds_solutions() {
        let r = RingSpec::zmod(6).unwrap();
        let a = zm(6, 2, 2, &[2, 3, 0, 3]);
        let x = solve(&r, &a, &[Value::Res(5), Value::Res(3)]).unwrap().unwrap();
        let ax = a.mul(&r, &Mat { rows: 2, cols: 1, data: x });
        assert_eq!(ax.data, vec![Value::Res(5), Value::Res(3)]);
        assert!(solve(&r, &zm(6, 1, 1, &[2]), &[Value::Res(1)]).unwrap().is_none());
    }

    proptest! {
        #[test]
        fn zmod_diagonalization_is_valid(
            n in prop::sample::select(vec![4u64, 6, 8, 9, 12, 30]),
            rows in 1usize..4,
            cols in 1usize..4,
            seed in prop::collection::vec(0u64..1000, 9),
        ) {
            let r = RingSpec::zmod(n).unwrap();
            let data: Vec<u64> = seed.iter().take(rows * cols).map(|x| x % n).collect();
            check(&r, &zm(n, rows, cols, &data));
        }

        #[test]
        fn integer_diagonalization_is_valid(
            rows in 1usize..4,
            cols in 1usize..4,
            seed in prop::collection::vec(-20i64..20, 9),
        ) {
            let z = RingSpec::Integers;
            let a = Mat::from_fn(rows, cols, |i, j| Value::Int(seed[i * cols + j].into()));
            check(&z, &a);
        }

        #[test]
        fn local_and_field_diagonalization_is_valid(
            seed in prop::collection::vec(0u64..9, 6),
        ) {
            let f = RingSpec::finite_field(9).unwrap();
            check(&f, &Mat::from_fn(2, 3, |i, j| Value::Gf(seed[i * 3 + j])));
            let loc = RingSpec::localized(3).unwrap();
            check(&loc, &Mat::from_fn(3, 2, |i, j| crate::rings::rat(seed[i * 2 + j] as i64, 2)));
        }
    }
}

#[cfg(test)]
mod snf_tests {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(rows: usize, cols: usize, data: &[i64]) -> Mat {
        Mat::from_fn(rows, cols, |i, j| Value::Int(data[i * cols + j].into()))
    }

    fn int(v: &Value) -> BigInt {
        match v {
            Value::Int(x) => x.clone(),
            other => panic!("not an integer: {other}"),
        }
    }

    fn check(a: &Mat) -> SNFResult {
        let z = RingSpec::Integers;
        let r = snf(a).unwrap();
        assert_eq!(r.u.mul(&z, a).mul(&z, &r.v), r.d);
        assert!(int(&r.u.det(&z)).abs().is_one());
        assert!(int(&r.v.det(&z)).abs().is_one());
        let diag: Vec<BigInt> = (0..a.rows.min(a.cols)).map(|i| int(r.d.get(i, i))).collect();
        for (i, x) in diag.iter().enumerate() {
            assert!(!x.is_negative());
            if let Some(y) = diag.get(i + 1) {
                assert!(if x.is_zero() { y.is_zero() } else { y.is_multiple_of(x) });
            }
        }
        r
    }

    #[test]
    fn examples() {
        assert_eq!(check(&ints(2, 2, &[2, 0, 0, 3])).d, ints(2, 2, &[1, 0, 0, 6]));
        let zero = check(&ints(2, 3, &[0; 6]));
        assert_eq!(zero.d, ints(2, 3, &[0; 6]));
        assert_eq!(zero.u, Mat::identity(&RingSpec::Integers, 2));
        assert_eq!(zero.v, Mat::identity(&RingSpec::Integers, 3));
        assert_eq!(check(&ints(1, 2, &[2, 3])).d, ints(1, 2, &[1, 0]));
    }

    #[test]
    fn random_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..500 {
            let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
            let data: Vec<i64> = (0..r * c).map(|_| rng.gen_range(-50..=50)).collect();
            check(&ints(r, c, &data));
        }
    }
}
