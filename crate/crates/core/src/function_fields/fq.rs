//! Finite fields F_{p^r} with log/antilog tables. Elements are u32 indices whose base-p
//! digits are the coordinates on the power basis of a primitive root of the modulus.

use crate::arith;
use crate::error::{Error, Result};

pub type Fq = u32;

/// Largest field the tables are built for.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;

#[derive(Clone, Debug)]
pub struct FqField {
    p: u64,
    degree: u32,
    q: u64,
    modulus: Vec<u64>,
    exp: Vec<Fq>,
    log: Vec<u32>,
}

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for FqField {}

impl FqField {
    pub fn new(q: u64) -> Result<Self> {
        let (p, degree) = arith::prime_power(q)
            .ok_or_else(|| Error::invalid(format!("{q} is not a prime power")))?;
        if q > MAX_FIELD_SIZE {
            return Err(Error::Budget(format!("field size {q} exceeds {MAX_FIELD_SIZE}")));
        }
        let r = degree as usize;
        let digits_of = |mut x: u64| -> Vec<u64> {
            (0..r)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        // first monic modulus in index order whose root x generates F_q^*
        for tail in 0..q {
            let low = digits_of(tail);
            if low[0] == 0 && q > 2 {
                continue;
            }
            let mut exp = Vec::with_capacity(q as usize - 1);
            let mut cur = vec![0u64; r];
            cur[0] = 1;
            let mut ok = true;
            for i in 0..q - 1 {
                let idx = encode(&cur, p);
                if i > 0 && idx == 1 {
                    ok = false;
                    break;
                }
                exp.push(idx as Fq);
                // multiply by x and reduce with x^r = −Σ low_i x^i
                let top = cur[r - 1];
                for j in (1..r).rev() {
                    cur[j] = (cur[j - 1] + p * p - top * low[j] % p) % p;
                }
                cur[0] = (p - top * low[0] % p) % p;
            }
            if !ok || encode(&cur, p) != 1 {
                continue;
            }
            let mut log = vec![u32::MAX; q as usize];
            let mut distinct = true;
            for (i, &e) in exp.iter().enumerate() {
                if log[e as usize] != u32::MAX {
                    distinct = false;
                    break;
                }
                log[e as usize] = i as u32;
            }
            if !distinct {
                continue;
            }
            let mut modulus = low.clone();
            modulus.push(1);
            return Ok(FqField { p, degree, q, modulus, exp, log });
        }
        Err(Error::cross(format!("no primitive modulus found for F_{q}")))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    /// Defining polynomial over F_p, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.q as Fq
    }

    /// The primitive root whose powers index the log table.
    pub fn generator(&self) -> Fq {
        if self.q == 2 {
            1
        } else {
            self.exp[1]
        }
    }

    pub fn digits(&self, a: Fq) -> Vec<u64> {
        let mut x = a as u64;
        (0..self.degree)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, d: &[u64]) -> Fq {
        encode(d, self.p) as Fq
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> Fq {
        c.rem_euclid(self.p as i64) as Fq
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.degree == 1 {
            return ((a as u64 + b as u64) % self.p) as Fq;
        }
        let (mut x, mut y, mut out, mut place) = (a as u64, b as u64, 0u64, 1u64);
        while x > 0 || y > 0 {
            out += (x % self.p + y % self.p) % self.p * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        out as Fq
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if self.degree == 1 {
            return ((self.p - a as u64) % self.p) as Fq;
        }
        let (mut x, mut out, mut place) = (a as u64, 0u64, 1u64);
        while x > 0 {
            out += (self.p - x % self.p) % self.p * place;
            x /= self.p;
            place *= self.p;
        }
        out as Fq
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % n;
        self.exp[e as usize]
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        let e = (n - self.log[a as usize] as u64) % n;
        Some(self.exp[e as usize])
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.q - 1;
        let l = (self.log[a as usize] as u128 * e as u128 % n as u128) as u64;
        self.exp[l as usize]
    }

    /// Discrete log to the base `generator()`.
    pub fn log(&self, a: Fq) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.p)
    }

    pub fn is_square(&self, a: Fq) -> bool {
        a == 0 || self.p == 2 || self.log[a as usize].is_multiple_of(2)
    }

    /// Absolute trace to F_p, returned as an integer in [0, p).
    pub fn trace(&self, a: Fq) -> u64 {
        let mut acc = 0;
        let mut t = a;
        for _ in 0..self.degree {
            acc = self.add(acc, t);
            t = self.frobenius(t);
        }
        debug_assert!((acc as u64) < self.p);
        acc as u64
    }

    /// Number of y with y² + b·y = c.
    pub fn quadratic_solutions(&self, b: Fq, c: Fq) -> u64 {
        if self.p == 2 {
            if b == 0 {
                return 1;
            }
            let b2 = self.mul(b, b);
            let t = self.div(c, b2).expect("b is nonzero");
            return if self.trace(t) == 0 { 2 } else { 0 };
        }
        // (y + b/2)² = c + b²/4
        let four = self.from_int(4);
        let disc = self.add(c, self.div(self.mul(b, b), four).expect("p is odd"));
        if disc == 0 {
            1
        } else if self.is_square(disc) {
            2
        } else {
            0
        }
    }

    /// Images of the elements of `sub` under a fixed embedding sub ⊂ self: the root of
    /// sub's modulus with the smallest index is the image of sub's primitive root.
    pub fn embedding(&self, sub: &FqField) -> Result<Vec<Fq>> {
        if sub.p != self.p || !self.degree.is_multiple_of(sub.degree) {
            return Err(Error::invalid(format!("F_{} does not embed in F_{}", sub.q, self.q)));
        }
        let eval = |z: Fq| -> Fq {
            let mut acc = 0;
            for &c in sub.modulus.iter().rev() {
                acc = self.add(self.mul(acc, z), c as Fq);
            }
            acc
        };
        let root = self
            .elements()
            .find(|&z| eval(z) == 0)
            .ok_or_else(|| Error::cross("subfield modulus has no root"))?;
        let mut powers = vec![1 as Fq];
        for i in 1..sub.degree as usize {
            powers.push(self.mul(powers[i - 1], root));
        }
        Ok(sub
            .elements()
            .map(|a| {
                sub.digits(a)
                    .iter()
                    .zip(&powers)
                    .fold(0, |acc, (&d, &z)| self.add(acc, self.mul(d as Fq, z)))
            })
            .collect())
    }
}

fn encode(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axioms(q: u64) {
        let f = FqField::new(q).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            assert_eq!(f.pow(a, q), a);
        }
        // Frobenius is additive and bijective
        let mut seen = vec![false; q as usize];
        for a in f.elements() {
            seen[f.frobenius(a) as usize] = true;
            for b in f.elements().step_by(7) {
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.mul(a, f.add(b, 1)), f.add(f.mul(a, b), a));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn small_fields() {
        for q in [2, 3, 4, 5, 8, 9, 25, 27, 49, 64] {
            axioms(q);
        }
        assert!(FqField::new(6).is_err());
    }

    #[test]
    fn quadratic_counts_match_enumeration() {
        for q in [4, 5, 8, 9] {
            let f = FqField::new(q).unwrap();
            for b in f.elements() {
                for c in f.elements() {
                    let brute = f.elements().filter(|&y| f.add(f.mul(y, y), f.mul(b, y)) == c).count();
                    assert_eq!(f.quadratic_solutions(b, c), brute as u64, "q={q} b={b} c={c}");
                }
            }
        }
    }

    #[test]
    fn embeddings_are_ring_maps() {
        for (small, big) in [(3, 9), (3, 27), (4, 16), (2, 8), (5, 25)] {
            let k = FqField::new(small).unwrap();
            let l = FqField::new(big).unwrap();
            let e = l.embedding(&k).unwrap();
            for a in k.elements() {
                for b in k.elements() {
                    assert_eq!(e[k.add(a, b) as usize], l.add(e[a as usize], e[b as usize]));
                    assert_eq!(e[k.mul(a, b) as usize], l.mul(e[a as usize], e[b as usize]));
                }
            }
        }
    }
}
