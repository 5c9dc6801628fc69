//! Factorization of Φ_{p^n} over Z/ℓ^K: equal-degree splitting mod ℓ followed by
//! linear Hensel lifting.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{self, Poly};
use super::zl::Zl;
use crate::arith;
use crate::character_lattice::f_n_direct;
use crate::character_lattice::a_ell_p;
use crate::error::{Error, Result};

const SPLIT_SEED: u64 = 0x5eed_1a7e;

/// A monic degree-f factor of Φ_{p^n} over Z/ℓ^K; its root stands for ζ_{p^n}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicFactorBasis {
    ring: Zl,
    p: u64,
    level: u32,
    index: usize,
    factor: Poly,
}

impl CyclotomicFactorBasis {
    pub fn ring(&self) -> Zl {
        self.ring
    }

    pub fn ell(&self) -> u64 {
        self.ring.ell()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Position in the sorted factor list.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn degree(&self) -> usize {
        self.factor.len() - 1
    }

    pub fn factor(&self) -> &[u128] {
        &self.factor
    }

    /// p^level, the order of the root.
    pub fn root_order(&self) -> u64 {
        self.p.pow(self.level)
    }

    /// Reduces a polynomial modulo the factor, padded to exactly `degree` coordinates.
    pub fn reduce(&self, a: &[u128]) -> Vec<u128> {
        let mut r = poly::rem_monic(&self.ring, a, &self.factor);
        r.resize(self.degree(), 0);
        r
    }

    /// In-place reduction of a dense polynomial whose entries are already reduced mod ℓ^K.
    pub fn reduce_dense(&self, mut a: Vec<u128>) -> Vec<u128> {
        let f = self.degree();
        let r = &self.ring;
        for i in (f..a.len()).rev() {
            let c = a[i];
            if c == 0 {
                continue;
            }
            for j in 0..f {
                let g = self.factor[j];
                if g != 0 {
                    a[i - f + j] = r.sub(a[i - f + j], r.mul(c, g));
                }
            }
            a[i] = 0;
        }
        a.truncate(f);
        a.resize(f, 0);
        a
    }

    /// Coordinates of root^e; the exponent is read modulo p^level.
    pub fn root_power(&self, e: i128) -> Vec<u128> {
        let order = self.root_order() as i128;
        let e = e.rem_euclid(order) as usize;
        let mut mono = vec![0u128; e + 1];
        mono[e] = 1;
        self.reduce_dense(mono)
    }
}

/// Lexicographic comparison of coefficient vectors, constant term first.
fn lex_cmp(a: &[u128], b: &[u128]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// All monic irreducible factors of Φ_{p^n} mod ℓ, lifted to precision K and sorted by
/// their reduction mod ℓ.
pub fn hensel_cyclotomic_factors(
    ell: u64,
    p: u64,
    n: u32,
    precision: u32,
) -> Result<Vec<CyclotomicFactorBasis>> {
    arith::require_ell_p(ell, p)?;
    let ring = Zl::new(ell, precision)?;
    if n == 0 {
        return Ok(vec![CyclotomicFactorBasis {
            ring,
            p,
            level: 0,
            index: 0,
            factor: vec![ring.neg(1), 1],
        }]);
    }
    let a = a_ell_p(ell, p)?;
    // above level a every factor is a base factor composed with x^{p^{n-a}}
    let base = n.min(a.max(1));
    let field = ring.residue_field();
    let phi_base = poly::cyclotomic_prime_power(&field, p, base);
    let f_base = f_n_direct(ell, p, base)? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED ^ (ell << 32) ^ (p << 8) ^ base as u64);
    let mut residues = equal_degree_split(&field, &phi_base, f_base, &mut rng);
    residues.sort_by(|x, y| lex_cmp(x, y));
    let phi_base_k = poly::cyclotomic_prime_power(&ring, p, base);
    let mut lifted = Vec::with_capacity(residues.len());
    for g in &residues {
        lifted.push(hensel_lift(&ring, &phi_base_k, g)?);
    }
    let stretch = p.pow(n - base) as usize;
    let mut factors: Vec<Poly> =
        lifted.into_iter().map(|g| poly::substitute_power(&g, stretch)).collect();
    factors.sort_by(|x, y| {
        let rx: Vec<u128> = x.iter().map(|&c| c % ell as u128).collect();
        let ry: Vec<u128> = y.iter().map(|&c| c % ell as u128).collect();
        lex_cmp(&rx, &ry)
    });
    Ok(factors
        .into_iter()
        .enumerate()
        .map(|(index, factor)| CyclotomicFactorBasis { ring, p, level: n, index, factor })
        .collect())
}

/// Splits a squarefree product of irreducibles of common degree f over F_ℓ.
fn equal_degree_split(field: &Zl, f_poly: &[u128], f: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let deg = f_poly.len() - 1;
    if deg == f {
        return vec![f_poly.to_vec()];
    }
    let ell = field.ell();
    loop {
        let a: Poly = (0..deg).map(|_| rng.gen_range(0..ell) as u128).collect();
        let mut a = a;
        poly::trim(&mut a);
        if a.is_empty() {
            continue;
        }
        let splitter = if ell == 2 {
            // absolute trace to F_2
            let mut acc = Vec::new();
            let mut term = a.clone();
            for _ in 0..f {
                acc = poly::add(field, &acc, &term);
                term = poly::mulmod(field, &term, &term, f_poly);
            }
            acc
        } else {
            // norm to F_ℓ, then the quadratic character
            let mut norm = vec![1u128];
            let mut term = poly::rem_monic(field, &a, f_poly);
            for _ in 0..f {
                norm = poly::mulmod(field, &norm, &term, f_poly);
                term = poly::powmod(field, &term, ell as u128, f_poly);
            }
            let chi = poly::powmod(field, &norm, (ell as u128 - 1) / 2, f_poly);
            poly::sub(field, &chi, &[1])
        };
        let g = poly::gcd_field(field, &splitter, f_poly);
        let dg = g.len().saturating_sub(1);
        if dg == 0 || dg == deg {
            continue;
        }
        let (h, rem) = poly::divrem_monic(field, f_poly, &g);
        debug_assert!(rem.is_empty());
        let mut out = equal_degree_split(field, &g, f, rng);
        out.extend(equal_degree_split(field, &h, f, rng));
        return out;
    }
}

/// Lifts a monic factor g of `target` mod ℓ to a monic factor mod ℓ^K.
fn hensel_lift(ring: &Zl, target: &[u128], g0: &[u128]) -> Result<Poly> {
    let field = ring.residue_field();
    let target_mod_l: Poly = {
        let mut t: Poly = target.iter().map(|&c| c % field.modulus()).collect();
        poly::trim(&mut t);
        t
    };
    let (h0, rem) = poly::divrem_monic(&field, &target_mod_l, g0);
    if !rem.is_empty() {
        return Err(Error::cross("residue factor does not divide the cyclotomic polynomial"));
    }
    let (gcd, _, t) = poly::ext_gcd_field(&field, g0, &h0);
    if gcd != vec![1] {
        return Err(Error::cross("factor and cofactor are not coprime mod ell"));
    }
    // the lifts never change the residues g0 and h0
    let mut g: Poly = g0.to_vec();
    let mut h: Poly = h0.clone();
    let ell = ring.ell() as u128;
    let mut lk = 1u128;
    for _ in 1..ring.precision() {
        lk *= ell;
        let diff = poly::sub(ring, target, &poly::mul(ring, &g, &h));
        let mut e: Poly = diff.iter().map(|&c| (c / lk) % ell).collect();
        poly::trim(&mut e);
        if e.is_empty() {
            continue;
        }
        // g += ℓ^k·r with r = t·e mod g0, h += ℓ^k·(e − h0·r)/g0
        let r = poly::rem_monic(&field, &poly::mul(&field, &t, &e), g0);
        let num = poly::sub(&field, &e, &poly::mul(&field, &h0, &r));
        let (dh, rem) = poly::divrem_monic(&field, &num, g0);
        if !rem.is_empty() {
            return Err(Error::cross("Hensel step left a nonzero remainder"));
        }
        g = poly::add(ring, &g, &poly::scale(ring, &r, lk));
        h = poly::add(ring, &h, &poly::scale(ring, &dh, lk));
    }
    if g.len() != g0.len() || *g.last().unwrap() != 1 {
        return Err(Error::cross("lifted factor lost monicity"));
    }
    Ok(g)
}

/// Factors for one level, shared behind an Arc.
pub fn shared_factors(ell: u64, p: u64, n: u32, precision: u32) -> Result<Vec<Arc<CyclotomicFactorBasis>>> {
    Ok(hensel_cyclotomic_factors(ell, p, n, precision)?.into_iter().map(Arc::new).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_check(ell: u64, p: u64, n: u32, k: u32) {
        let factors = hensel_cyclotomic_factors(ell, p, n, k).unwrap();
        let ring = Zl::new(ell, k).unwrap();
        let mut prod = vec![1u128];
        for f in &factors {
            prod = poly::mul(&ring, &prod, f.factor());
        }
        assert_eq!(prod, poly::cyclotomic_prime_power(&ring, p, n), "({ell},{p},{n})");
    }

    #[test]
    fn spec_examples() {
        let f = hensel_cyclotomic_factors(2, 3, 1, 8).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].degree(), 2);
        let f = hensel_cyclotomic_factors(5, 2, 2, 8).unwrap();
        assert_eq!(f.iter().map(|b| b.degree()).collect::<Vec<_>>(), vec![1, 1]);
        let f = hensel_cyclotomic_factors(2, 3, 2, 8).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].degree(), 6);
        assert!(hensel_cyclotomic_factors(3, 3, 1, 8).is_err());
        assert!(hensel_cyclotomic_factors(4, 3, 1, 8).is_err());
    }

    #[test]
    fn products_recover_cyclotomic() {
        for (ell, p, n) in [(2, 3, 1), (7, 3, 2), (5, 2, 3), (3, 2, 4), (2, 7, 1), (11, 5, 2), (3, 11, 2)] {
            product_check(ell, p, n, 16);
        }
    }

    #[test]
    fn roots_have_the_right_order() {
        let f = hensel_cyclotomic_factors(7, 3, 2, 20).unwrap();
        for b in &f {
            assert_eq!(b.root_power(9), b.root_power(0));
            assert_ne!(b.root_power(3), b.root_power(0));
        }
    }
}
