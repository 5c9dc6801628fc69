//! Frobenius data for the 𝔭-cyclotomic Carlitz tower of F_q(t): the p-primary part of
//! (A/𝔭^n)^* with a brute-force discrete-log table.
//!
//! (A/𝔭^n)^* splits as (A/𝔭)^*, of order prime to p, times the one-units
//! (1 + 𝔭)/(1 + 𝔭^n). For n ≤ 2 the one-units are elementary abelian of rank
//! r·deg 𝔭 (q = p^r), so the tower level n corresponds to Γ at level n − 1 with
//! d = r·deg 𝔭.

use std::collections::HashMap;

use super::fq::{Fq, FqField};
use super::fq_poly::{self, FqPoly};
use super::places::Place;
use crate::character_lattice::GammaQuotient;
use crate::error::{Error, Result};

pub const MAX_CARLITZ_LEVEL: u32 = 2;
pub const MAX_PRIME_DEGREE: u32 = 2;

#[derive(Clone, Debug)]
pub struct CarlitzData {
    field: FqField,
    prime: FqPoly,
    level: u32,
    modulus: FqPoly,
    quotient: GammaQuotient,
    /// Residue mod 𝔭^n (padded to n·deg 𝔭 coefficients) ↦ index in Γ.
    dlog: HashMap<Vec<Fq>, u64>,
}

impl CarlitzData {
    pub fn new(field: FqField, prime: FqPoly, level: u32) -> Result<Self> {
        if !(1..=MAX_CARLITZ_LEVEL).contains(&level) {
            return Err(Error::invalid(format!("Carlitz level {level} outside 1..={MAX_CARLITZ_LEVEL}")));
        }
        let deg = fq_poly::degree(&prime).unwrap_or(0) as u32;
        if deg == 0 || deg > MAX_PRIME_DEGREE || !fq_poly::is_monic(&prime) || !fq_poly::is_irreducible(&field, &prime)
        {
            return Err(Error::invalid(format!(
                "the Carlitz prime must be monic irreducible of degree 1..={MAX_PRIME_DEGREE}"
            )));
        }
        let p = field.characteristic();
        let d = field.degree() * deg;
        let quotient = GammaQuotient::new(p, d, level - 1)?;
        let mut modulus: FqPoly = vec![1];
        for _ in 0..level {
            modulus = fq_poly::mul(&field, &modulus, &prime);
        }
        let big_q = field.size().pow(deg);
        let width = (level * deg) as usize;
        let residues = field.size().pow(width as u32);
        // x ↦ x^e with e ≡ 0 mod (Q − 1), e ≡ 1 mod Q^{n−1} projects onto the one-units
        let unit_part = big_q.pow(level - 1);
        let e = if unit_part == 1 {
            0
        } else {
            let inv = crate::arith::inv_mod((big_q - 1) as u128, unit_part as u128).expect("Q − 1 is prime to p");
            (big_q - 1) as u128 * inv
        };
        let mut dlog = HashMap::new();
        for idx in 0..residues {
            let mut r: FqPoly = (0..width).map(|i| ((idx / field.size().pow(i as u32)) % field.size()) as Fq).collect();
            fq_poly::trim(&mut r);
            if fq_poly::rem(&field, &r, &prime).is_empty() {
                continue;
            }
            let one_unit = fq_poly::powmod(&field, &r, e, &modulus);
            let index = Self::one_unit_log(&field, &prime, level, &quotient, &one_unit)?;
            dlog.insert(pad(&r, width), index);
        }
        Ok(CarlitzData { field, prime, level, modulus, quotient, dlog })
    }

    /// For u = 1 + a·𝔭 mod 𝔭²: the F_p-coordinates of a mod 𝔭.
    fn one_unit_log(field: &FqField, prime: &[Fq], level: u32, gamma: &GammaQuotient, u: &[Fq]) -> Result<u64> {
        if level == 1 {
            return Ok(0);
        }
        let (a, r) = fq_poly::divrem(field, &fq_poly::sub(field, u, &[1]), prime);
        if !r.is_empty() {
            return Err(Error::cross("projection did not land in the one-units"));
        }
        let a = fq_poly::rem(field, &a, prime);
        let deg = prime.len() - 1;
        let mut coords = Vec::with_capacity(gamma.d as usize);
        for i in 0..deg {
            coords.extend(field.digits(*a.get(i).unwrap_or(&0)));
        }
        Ok(gamma.to_index(&coords))
    }

    pub fn from_descriptor(q: u64, prime: &str, level: u32) -> Result<Self> {
        let field = FqField::new(q)?;
        match Place::resolve(&prime.parse()?, &field)? {
            Place::Finite(poly) => CarlitzData::new(field, poly, level),
            _ => Err(Error::invalid("the Carlitz prime must be a finite place")),
        }
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    pub fn prime(&self) -> &[Fq] {
        &self.prime
    }

    pub fn prime_degree(&self) -> u32 {
        (self.prime.len() - 1) as u32
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Γ at level n − 1.
    pub fn quotient(&self) -> GammaQuotient {
        self.quotient
    }

    /// Frobenius at v in Γ: the one-unit part of v mod 𝔭^n; ∞ maps to the identity.
    pub fn frobenius(&self, v: &Place) -> Result<u64> {
        match v {
            Place::Infinity => Ok(0),
            Place::Abstract { .. } => Err(Error::invalid("Carlitz Frobenius needs an explicit polynomial place")),
            Place::Finite(poly) => {
                if poly.as_slice() == self.prime.as_slice() {
                    return Err(Error::invalid("the Carlitz prime is ramified"));
                }
                self.frobenius_of_residue(poly)
            }
        }
    }

    /// Image of a polynomial prime to 𝔭.
    pub fn frobenius_of_residue(&self, a: &[Fq]) -> Result<u64> {
        let r = fq_poly::rem(&self.field, a, &self.modulus);
        let width = (self.level * self.prime_degree()) as usize;
        self.dlog
            .get(&pad(&r, width))
            .copied()
            .ok_or_else(|| Error::invalid("polynomial is not prime to the Carlitz prime"))
    }
}

fn pad(r: &[Fq], width: usize) -> Vec<Fq> {
    let mut v = r.to_vec();
    v.resize(width, 0);
    v
}
