//! Elements of Z_ℓ[μ_{p^n}] realized as Z/ℓ^K[x]/(g) for a lifted factor g.

use std::fmt;
use std::sync::Arc;

use super::hensel::CyclotomicFactorBasis;
use super::poly;
use super::zl::{PadicScalar, Valuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnramifiedElement {
    basis: Arc<CyclotomicFactorBasis>,
    coeffs: Vec<u128>,
}

impl UnramifiedElement {
    pub fn from_coeffs(basis: Arc<CyclotomicFactorBasis>, coeffs: &[u128]) -> Self {
        let ring = basis.ring();
        let reduced: Vec<u128> = coeffs.iter().map(|&c| ring.reduce(c)).collect();
        let coeffs = basis.reduce(&reduced);
        UnramifiedElement { basis, coeffs }
    }

    pub fn zero(basis: Arc<CyclotomicFactorBasis>) -> Self {
        let f = basis.degree();
        UnramifiedElement { basis, coeffs: vec![0; f] }
    }

    pub fn from_scalar(basis: Arc<CyclotomicFactorBasis>, c: u128) -> Self {
        let mut coeffs = vec![0u128; basis.degree()];
        coeffs[0] = basis.ring().reduce(c);
        UnramifiedElement { basis, coeffs }
    }

    pub fn one(basis: Arc<CyclotomicFactorBasis>) -> Self {
        Self::from_scalar(basis, 1)
    }

    /// root^e, the image of ζ_{p^n}^e.
    pub fn root_power(basis: Arc<CyclotomicFactorBasis>, e: i128) -> Self {
        let coeffs = basis.root_power(e);
        UnramifiedElement { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<CyclotomicFactorBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[u128] {
        &self.coeffs
    }

    pub fn coordinates(&self) -> Vec<PadicScalar> {
        let ring = self.basis.ring();
        self.coeffs.iter().map(|&c| ring.scalar(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The constant coordinate if all others vanish.
    pub fn as_scalar(&self) -> Option<u128> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    /// ℓ is a uniformizer, so the valuation is the minimum over coordinates.
    pub fn valuation(&self) -> Valuation {
        let ring = self.basis.ring();
        self.coeffs
            .iter()
            .filter_map(|&c| ring.valuation(c).finite())
            .min()
            .map(Valuation::Finite)
            .unwrap_or(Valuation::AtLeast(ring.precision()))
    }

    fn same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis,
            "elements of different component rings"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same(other);
        let ring = self.basis.ring();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ring.add(a, b)).collect();
        UnramifiedElement { basis: self.basis.clone(), coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same(other);
        let ring = self.basis.ring();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ring.sub(a, b)).collect();
        UnramifiedElement { basis: self.basis.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        let ring = self.basis.ring();
        let coeffs = self.coeffs.iter().map(|&a| ring.neg(a)).collect();
        UnramifiedElement { basis: self.basis.clone(), coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same(other);
        let ring = self.basis.ring();
        let prod = poly::mul(&ring, &self.coeffs, &other.coeffs);
        UnramifiedElement { basis: self.basis.clone(), coeffs: self.basis.reduce(&prod) }
    }

    pub fn scale(&self, c: u128) -> Self {
        let ring = self.basis.ring();
        let coeffs = self.coeffs.iter().map(|&a| ring.mul(a, c)).collect();
        UnramifiedElement { basis: self.basis.clone(), coeffs }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::one(self.basis.clone());
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
}

impl fmt::Display for UnramifiedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", terms.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_rings::hensel::hensel_cyclotomic_factors;

    #[test]
    fn unit_with_odd_constant_term() {
        let b = Arc::new(hensel_cyclotomic_factors(2, 3, 1, 8).unwrap().remove(0));
        let x = UnramifiedElement::from_coeffs(b.clone(), &[1, 2]);
        assert_eq!(x.valuation(), Valuation::Finite(0));
        let y = UnramifiedElement::from_coeffs(b.clone(), &[4, 8]);
        assert_eq!(y.valuation(), Valuation::Finite(2));
        assert_eq!(UnramifiedElement::zero(b).valuation(), Valuation::AtLeast(8));
    }

    #[test]
    fn root_satisfies_cyclotomic_relation() {
        let b = Arc::new(hensel_cyclotomic_factors(2, 3, 1, 8).unwrap().remove(0));
        let z = UnramifiedElement::root_power(b.clone(), 1);
        let sum = UnramifiedElement::one(b.clone()).add(&z).add(&z.mul(&z));
        assert!(sum.is_zero());
        assert_eq!(z.pow(3), UnramifiedElement::one(b));
    }
}
