//! Exact arithmetic in Z[ζ_{p^n}] on the power basis 1, ζ, …, ζ^{φ(p^n)−1}.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::hensel::CyclotomicFactorBasis;
use super::unramified::UnramifiedElement;
use crate::arith;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloExact {
    p: u64,
    level: u32,
    coeffs: Vec<BigInt>,
}

impl CycloExact {
    fn order(p: u64, level: u32) -> usize {
        p.pow(level) as usize
    }

    fn dim(p: u64, level: u32) -> usize {
        arith::phi_prime_power(p, level) as usize
    }

    pub fn zero(p: u64, level: u32) -> Self {
        CycloExact { p, level, coeffs: vec![BigInt::zero(); Self::dim(p, level)] }
    }

    pub fn from_int(p: u64, level: u32, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(p, level);
        z.coeffs[0] = c.into();
        z
    }

    pub fn one(p: u64, level: u32) -> Self {
        Self::from_int(p, level, 1)
    }

    /// ζ^e with e read modulo p^level.
    pub fn zeta_pow(p: u64, level: u32, e: i128) -> Self {
        let n = Self::order(p, level);
        let mut v = vec![BigInt::zero(); n];
        v[e.rem_euclid(n as i128) as usize] = BigInt::one();
        Self::from_exponent_vector(p, level, v)
    }

    /// Reduces Σ v[e]·ζ^e (e < p^level) to the power basis.
    pub fn from_exponent_vector(p: u64, level: u32, mut v: Vec<BigInt>) -> Self {
        let n = Self::order(p, level);
        assert!(v.len() <= n, "exponent vector longer than p^level");
        v.resize(n, BigInt::zero());
        let dim = Self::dim(p, level);
        if level > 0 {
            let step = n / p as usize;
            // ζ^e = −Σ_{i<p−1} ζ^{e−φ+i·p^{n−1}} for e ≥ φ
            for e in dim..n {
                if v[e].is_zero() {
                    continue;
                }
                let c = std::mem::take(&mut v[e]);
                let base = e - dim;
                for i in 0..(p as usize - 1) {
                    v[base + i * step] -= &c;
                }
            }
        }
        v.truncate(dim);
        CycloExact { p, level, coeffs: v }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Some(c) when every non-constant coordinate vanishes.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check(&self, other: &Self) {
        assert!(self.p == other.p && self.level == other.level, "cyclotomic level mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        CycloExact { p: self.p, level: self.level, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        CycloExact { p: self.p, level: self.level, coeffs }
    }

    pub fn neg(&self) -> Self {
        CycloExact { p: self.p, level: self.level, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        CycloExact { p: self.p, level: self.level, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let n = Self::order(self.p, self.level);
        let mut v = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    v[(i + j) % n] += a * b;
                }
            }
        }
        Self::from_exponent_vector(self.p, self.level, v)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::one(self.p, self.level);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        result
    }

    /// σ_a: ζ ↦ ζ^a for a prime to p.
    pub fn galois(&self, a: u64) -> Self {
        let n = Self::order(self.p, self.level);
        assert!(self.level == 0 || !a.is_multiple_of(self.p), "Galois exponent must be prime to p");
        let mut v = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                v[(i as u128 * a as u128 % n as u128) as usize] += c;
            }
        }
        Self::from_exponent_vector(self.p, self.level, v)
    }

    /// Norm to Z: the product of all Galois conjugates.
    pub fn norm(&self) -> BigInt {
        let n = Self::order(self.p, self.level) as u64;
        let mut acc = Self::one(self.p, self.level);
        for a in 1..n.max(2) {
            if self.level == 0 || a % self.p != 0 {
                acc = acc.mul(&self.galois(a));
            }
            if self.level == 0 {
                break;
            }
        }
        acc.as_integer().expect("norm is rational")
    }

    /// Image under ζ ↦ root of the given factor (same p and level).
    pub fn embed(&self, basis: &Arc<CyclotomicFactorBasis>) -> UnramifiedElement {
        assert_eq!((basis.p(), basis.level()), (self.p, self.level), "embedding level mismatch");
        let ring = basis.ring();
        let coeffs: Vec<u128> = self.coeffs.iter().map(|c| ring.from_bigint(c)).collect();
        UnramifiedElement::from_coeffs(basis.clone(), &coeffs)
    }

    /// Views an element of Z[ζ_{p^level}] inside Z[ζ_{p^target}].
    pub fn lift_to(&self, target: u32) -> Self {
        assert!(target >= self.level);
        let stretch = self.p.pow(target - self.level) as usize;
        let n = Self::order(self.p, target);
        let mut v = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * stretch] = c.clone();
        }
        Self::from_exponent_vector(self.p, target, v)
    }
}

impl fmt::Display for CycloExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_integer() {
            return write!(f, "{c}");
        }
        let terms: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", terms.join(", "))
    }
}

/// Multiplies χ ↦ value over one full Galois orbit of characters at level `level` and
/// returns the resulting rational integer. Keys are exponent vectors.
pub fn orbit_product_to_integer(
    p: u64,
    level: u32,
    values: &[(Vec<u64>, CycloExact)],
) -> Result<BigInt> {
    let (a0, v0) = values.first().ok_or_else(|| Error::invalid("empty orbit"))?;
    let modulus = p.pow(level);
    let scale = |u: u64, a: &[u64]| -> Vec<u64> {
        a.iter().map(|&x| (x as u128 * u as u128 % modulus.max(1) as u128) as u64).collect()
    };
    let units: Vec<u64> = (1..modulus.max(2)).filter(|u| level == 0 || u % p != 0).collect();
    let orbit: BTreeSet<Vec<u64>> = units.iter().map(|&u| scale(u, a0)).collect();
    let keys: BTreeSet<Vec<u64>> = values.iter().map(|(a, _)| a.clone()).collect();
    if keys.len() != values.len() {
        return Err(Error::invalid("repeated character in orbit data"));
    }
    if keys != orbit {
        return Err(Error::cross("characters do not form one full Galois orbit"));
    }
    let mut acc = CycloExact::one(p, level);
    for (a, v) in values {
        if (v.p(), v.level()) != (p, level) {
            return Err(Error::invalid("value at the wrong cyclotomic level"));
        }
        let u = *units.iter().find(|&&u| scale(u, a0) == *a).expect("orbit member");
        if *v != v0.galois(u) {
            return Err(Error::cross(format!("Galois equivariance fails at character {a:?}")));
        }
        acc = acc.mul(v);
    }
    acc.as_integer().ok_or_else(|| Error::cross("orbit product is not rational"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_relations() {
        let z = CycloExact::zeta_pow(3, 1, 1);
        let z2 = z.mul(&z);
        assert_eq!(CycloExact::one(3, 1).add(&z).add(&z2), CycloExact::zero(3, 1));
        assert_eq!(z.pow(3), CycloExact::one(3, 1));
    }

    #[test]
    fn orbit_product_examples() {
        let five = BigInt::from(5);
        let a = CycloExact::one(3, 1).sub(&CycloExact::zeta_pow(3, 1, 1).scale(&five));
        let b = CycloExact::one(3, 1).sub(&CycloExact::zeta_pow(3, 1, 2).scale(&five));
        let got = orbit_product_to_integer(3, 1, &[(vec![1], a.clone()), (vec![2], b)]).unwrap();
        assert_eq!(got, BigInt::from(31));
        let ones = [(vec![1], CycloExact::one(3, 1)), (vec![2], CycloExact::one(3, 1))];
        assert_eq!(orbit_product_to_integer(3, 1, &ones).unwrap(), BigInt::one());
        let bad = [(vec![1], a.clone()), (vec![2], a)];
        assert!(orbit_product_to_integer(3, 1, &bad).is_err());
    }

    #[test]
    fn norms() {
        // N(1 − ζ_9) = 3
        let x = CycloExact::one(3, 2).sub(&CycloExact::zeta_pow(3, 2, 1));
        assert_eq!(x.norm(), BigInt::from(3));
        let y = CycloExact::zeta_pow(3, 1, 1).lift_to(2);
        assert_eq!(y, CycloExact::zeta_pow(3, 2, 3));
    }
}
