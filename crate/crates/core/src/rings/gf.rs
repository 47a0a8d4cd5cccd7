//! Finite fields `GF(p^k)` with elements packed as base-`p` digit strings.

use serde::{Deserialize, Serialize};

/// A finite field of order `q = p^k`, realized as `F_p[t]/(modulus)`.
///
/// Elements are encoded as integers `0 <= x < q` whose base-`p` digits are the
/// polynomial coefficients (lowest degree first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaloisField {
    pub q: u64,
    pub p: u64,
    pub k: u32,
    /// Monic irreducible polynomial of degree `k`, coefficients lowest first.
    pub modulus: Vec<u64>,
}

impl GaloisField {
    /// Returns `None` unless `q` is a prime power.
    pub fn new(q: u64) -> Option<Self> {
        let (p, k) = prime_power(q)?;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            first_irreducible(p, k)
        };
        Some(GaloisField { q, p, k, modulus })
    }

    fn digits(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k as usize);
        let mut x = x;
        for _ in 0..self.k {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    fn pack(&self, d: &[u64]) -> u64 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.pack(&s)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.k == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let d: Vec<u64> = self
            .digits(a)
            .iter()
            .map(|x| (self.p - x) % self.p)
            .collect();
        self.pack(&d)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let p = self.p;
        if self.k == 1 {
            return ((a as u128 * b as u128) % p as u128) as u64;
        }
        let k = self.k as usize;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // reduce by the monic modulus from the top degree down
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, m) in self.modulus.iter().enumerate().take(k) {
                let idx = deg - k + i;
                prod[idx] = (prod[idx] + (p - c) * m % p) % p;
            }
            prod[deg] = 0;
        }
        self.pack(&prod[..k])
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }

    /// The image of the integer `n` under `Z -> GF(q)`.
    pub fn from_int(&self, n: i64) -> u64 {
        (n.rem_euclid(self.p as i64)) as u64
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs in increasing prime order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, k)] => Some((*p, *k)),
        _ => None,
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = {
        let l = b[db];
        let mut acc = 1u64;
        let mut base = l;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    };
    while r.len() > db {
        let c = *r.last().unwrap() * lead_inv % p;
        let shift = r.len() - 1 - db;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + (p - c) * bc % p) % p;
        }
        r.pop();
        while r.len() > 1 && *r.last().unwrap() == 0 && r.len() > db {
            r.pop();
        }
    }
    r
}

fn first_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let count = p.pow(k as u32);
    'cand: for idx in 0..count {
        let mut f: Vec<u64> = (0..k)
            .scan(idx, |s, _| {
                let d = *s % p;
                *s /= p;
                Some(d)
            })
            .collect();
        f.push(1);
        if f[0] == 0 {
            continue;
        }
        for deg in 1..=k / 2 {
            for gidx in 0..p.pow(deg as u32) {
                let mut g: Vec<u64> = (0..deg)
                    .scan(gidx, |s, _| {
                        let d = *s % p;
                        *s /= p;
                        Some(d)
                    })
                    .collect();
                g.push(1);
                if poly_rem(&f, &g, p).iter().all(|&c| c == 0) {
                    continue 'cand;
                }
            }
        }
        return f;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_is_a_field() {
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.modulus, vec![1, 1, 1]);
        for a in 1..4 {
            let inv = f.inv(a).unwrap();
            assert_eq!(f.mul(a, inv), 1);
        }
        // t * t = t + 1
        assert_eq!(f.mul(2, 2), 3);
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert!(GaloisField::new(6).is_none());
        assert!(GaloisField::new(1).is_none());
        assert_eq!(prime_power(27), Some((3, 3)));
    }

    #[test]
    fn gf9_multiplicative_group_is_cyclic_of_order_8() {
        let f = GaloisField::new(9).unwrap();
        for a in 1..9 {
            assert_eq!(f.pow(a, 8), 1);
        }
    }
}
