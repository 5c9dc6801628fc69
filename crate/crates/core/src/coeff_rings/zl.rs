//! Z/ℓ^K as a stand-in for Z_ℓ at finite precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};

/// Residues are held in a u128, so ℓ^K must stay below 2^120.
pub const MODULUS_BITS: u32 = 120;
pub const DEFAULT_PRECISION: u32 = 64;

/// Outcome of an ℓ-adic valuation at finite precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Valuation {
    Finite(u32),
    /// Zero modulo ℓ^K; the true valuation is at least K.
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn is_zero_at_precision(self) -> bool {
        matches!(self, Valuation::AtLeast(_))
    }

    /// Lower bound usable in comparisons.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zl {
    ell: u64,
    precision: u32,
    modulus: u128,
}

impl Zl {
    pub fn new(ell: u64, precision: u32) -> Result<Self> {
        arith::require_prime(ell)?;
        if precision == 0 {
            return Err(Error::invalid("precision must be positive"));
        }
        let max = Self::max_precision(ell);
        if precision > max {
            return Err(Error::invalid(format!(
                "precision {precision} exceeds the maximum {max} for ell = {ell}"
            )));
        }
        let modulus = (ell as u128).pow(precision);
        Ok(Zl { ell, precision, modulus })
    }

    /// Largest K with ℓ^K < 2^120.
    pub fn max_precision(ell: u64) -> u32 {
        let bound = 1u128 << MODULUS_BITS;
        let mut k = 0;
        let mut m = 1u128;
        while let Some(next) = m.checked_mul(ell as u128) {
            if next >= bound {
                break;
            }
            m = next;
            k += 1;
        }
        k
    }

    pub fn default_precision(ell: u64) -> u32 {
        DEFAULT_PRECISION.min(Self::max_precision(ell))
    }

    pub fn with_default_precision(ell: u64) -> Result<Self> {
        arith::require_prime(ell)?;
        Self::new(ell, Self::default_precision(ell))
    }

    /// The residue field F_ℓ.
    pub fn residue_field(&self) -> Zl {
        Zl { ell: self.ell, precision: 1, modulus: self.ell as u128 }
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    #[inline]
    pub fn reduce(&self, x: u128) -> u128 {
        x % self.modulus
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + (self.modulus - b)
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if self.modulus <= 1u128 << 64 {
            (a * b) % self.modulus
        } else {
            // byte-wise shift-and-add keeps every intermediate below 2^128
            let mut acc = 0u128;
            for i in (0..16).rev() {
                let byte = (b >> (8 * i)) & 0xff;
                acc = (acc << 8) % self.modulus;
                acc = self.add(acc, (a * byte) % self.modulus);
            }
            acc
        }
    }

    pub fn pow(&self, base: u128, mut exp: u128) -> u128 {
        let mut result = self.reduce(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    pub fn inv(&self, a: u128) -> Option<u128> {
        arith::inv_mod(a, self.modulus)
    }

    pub fn from_i128(&self, x: i128) -> u128 {
        x.rem_euclid(self.modulus as i128) as u128
    }

    pub fn from_u64(&self, x: u64) -> u128 {
        self.reduce(x as u128)
    }

    pub fn from_bigint(&self, x: &BigInt) -> u128 {
        let m = BigInt::from(self.modulus);
        x.mod_floor(&m).to_u128().expect("reduced value fits")
    }

    /// Symmetric lift in (−ℓ^K/2, ℓ^K/2].
    pub fn to_signed(&self, a: u128) -> i128 {
        if a > self.modulus / 2 {
            -((self.modulus - a) as i128)
        } else {
            a as i128
        }
    }

    pub fn valuation(&self, a: u128) -> Valuation {
        let a = self.reduce(a);
        if a == 0 {
            return Valuation::AtLeast(self.precision);
        }
        Valuation::Finite(arith::v_p(a, self.ell).expect("nonzero"))
    }

    pub fn ell_power(&self, e: u32) -> u128 {
        if e >= self.precision {
            0
        } else {
            (self.ell as u128).pow(e)
        }
    }

    pub fn scalar(&self, residue: u128) -> PadicScalar {
        PadicScalar { ring: *self, residue: self.reduce(residue) }
    }
}

/// ℓ-adic valuation of an exact integer; `None` for zero.
pub fn bigint_valuation(x: &BigInt, ell: u64) -> Option<u32> {
    if x.is_zero_big() {
        return None;
    }
    let l = BigInt::from(ell);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&l);
        if r.is_zero_big() {
            y = q;
            v += 1;
        } else {
            return Some(v);
        }
    }
}

trait IsZeroBig {
    fn is_zero_big(&self) -> bool;
}

impl IsZeroBig for BigInt {
    fn is_zero_big(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

/// An element of Z_ℓ known modulo ℓ^K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    ring: Zl,
    residue: u128,
}

impl PadicScalar {
    pub fn ring(&self) -> Zl {
        self.ring
    }

    pub fn residue(&self) -> u128 {
        self.residue
    }

    pub fn valuation(&self) -> Valuation {
        self.ring.valuation(self.residue)
    }

    pub fn inv(&self) -> Option<PadicScalar> {
        self.ring.inv(self.residue).map(|r| self.ring.scalar(r))
    }

    pub fn pow(&self, e: u128) -> PadicScalar {
        self.ring.scalar(self.ring.pow(self.residue, e))
    }

    fn check(&self, other: &PadicScalar) {
        assert_eq!(self.ring, other.ring, "scalars from different rings");
    }
}

impl Add for PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: PadicScalar) -> PadicScalar {
        self.check(&rhs);
        self.ring.scalar(self.ring.add(self.residue, rhs.residue))
    }
}

impl Sub for PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: PadicScalar) -> PadicScalar {
        self.check(&rhs);
        self.ring.scalar(self.ring.sub(self.residue, rhs.residue))
    }
}

impl Mul for PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: PadicScalar) -> PadicScalar {
        self.check(&rhs);
        self.ring.scalar(self.ring.mul(self.residue, rhs.residue))
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        self.ring.scalar(self.ring.neg(self.residue))
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.ring.ell, self.ring.precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        let r = Zl::new(2, 8).unwrap();
        assert_eq!(r.valuation(12), Valuation::Finite(2));
        assert_eq!(r.valuation(0), Valuation::AtLeast(8));
        assert_eq!(r.valuation(256), Valuation::AtLeast(8));
    }

    #[test]
    fn wide_modulus_multiplication() {
        let r = Zl::new(3, Zl::max_precision(3)).unwrap();
        assert!(r.modulus() > 1u128 << 64);
        let a = r.modulus() - 1;
        // (−1)(−1) = 1
        assert_eq!(r.mul(a, a), 1);
        let x = 123_456_789_012_345_678_901u128 % r.modulus();
        let y = 987_654_321_098_765_432_109u128 % r.modulus();
        let big = (BigInt::from(x) * BigInt::from(y)) % BigInt::from(r.modulus());
        assert_eq!(BigInt::from(r.mul(x, y)), big);
    }

    #[test]
    fn default_precision_clamps() {
        assert_eq!(Zl::default_precision(2), 64);
        assert_eq!(Zl::default_precision(3), 64);
        assert_eq!(Zl::default_precision(7), Zl::max_precision(7));
        assert!(Zl::max_precision(7) < 64);
        assert!(Zl::new(5, 0).is_err());
        assert!(Zl::new(4, 3).is_err());
    }

    #[test]
    fn inverse_of_three() {
        let r = Zl::new(2, 4).unwrap();
        assert_eq!(r.inv(3), Some(11));
        assert_eq!(bigint_valuation(&BigInt::from(-48), 2), Some(4));
    }
}
