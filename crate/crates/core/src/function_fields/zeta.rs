//! Zeta numerators P(u) and class numbers along the constant-field tower.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith;
use crate::coeff_rings::CycloExact;
use crate::error::{Error, Result};

/// P(u) = Π(1 − α_i u) of degree 2g, constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaNumerator {
    pub q: u64,
    pub genus: u32,
    #[serde(serialize_with = "crate::bigjson::ints")]
    pub coeffs: Vec<BigInt>,
}

fn big_pow(q: u64, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(q), e as usize)
}

impl ZetaNumerator {
    /// The numerator of the rational function field.
    pub fn trivial(q: u64) -> Self {
        ZetaNumerator { q, genus: 0, coeffs: vec![BigInt::one()] }
    }

    /// Newton's identities on s_m = q^m + 1 − N_m for m ≤ g, completed by
    /// c_{2g−k} = q^{g−k}·c_k; any further counts are checked against the result.
    pub fn from_counts(q: u64, genus: u32, counts: &[u64]) -> Result<Self> {
        let g = genus as usize;
        if counts.len() < g {
            return Err(Error::invalid(format!("{} point counts given, genus {g} needs {g}", counts.len())));
        }
        let s: Vec<BigInt> = counts
            .iter()
            .enumerate()
            .map(|(i, &n)| big_pow(q, i as u64 + 1) + 1 - BigInt::from(n))
            .collect();
        let mut c = vec![BigInt::zero(); 2 * g + 1];
        c[0] = BigInt::one();
        for k in 1..=g {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                acc -= &s[i - 1] * &c[k - i];
            }
            let (quot, r) = acc.div_rem(&BigInt::from(k));
            if !r.is_zero() {
                return Err(Error::cross(format!("inconsistent counts: Newton step {k} is not integral")));
            }
            c[k] = quot;
        }
        for k in 0..g {
            c[2 * g - k] = big_pow(q, (g - k) as u64) * &c[k];
        }
        let z = ZetaNumerator { q, genus, coeffs: c };
        let predicted = z.power_sums(counts.len());
        for (m, (a, b)) in predicted.iter().zip(&s).enumerate() {
            if a != b {
                return Err(Error::cross(format!("inconsistent counts: N_{} disagrees with P(u)", m + 1)));
            }
        }
        if !z.weil_bound_holds() {
            return Err(Error::cross("|a_1| exceeds the Weil bound 2g·√q"));
        }
        if !z.class_number().is_positive() {
            return Err(Error::cross("P(1) is not positive"));
        }
        Ok(z)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// s_1, …, s_count: power sums of the reciprocal roots.
    pub fn power_sums(&self, count: usize) -> Vec<BigInt> {
        let d = self.degree();
        let mut s: Vec<BigInt> = Vec::with_capacity(count);
        for k in 1..=count {
            let mut acc = if k <= d { -BigInt::from(k) * &self.coeffs[k] } else { BigInt::zero() };
            for i in 1..k.min(d + 1) {
                acc -= &self.coeffs[i] * &s[k - i - 1];
            }
            s.push(acc);
        }
        s
    }

    /// N_m = q^m + 1 − s_m.
    pub fn point_count(&self, m: u32) -> BigInt {
        let s = self.power_sums(m as usize);
        big_pow(self.q, m as u64) + 1 - &s[m as usize - 1]
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// h(F) = P(1).
    pub fn class_number(&self) -> BigInt {
        self.eval(&BigInt::one())
    }

    /// a_1² ≤ 4g²q.
    pub fn weil_bound_holds(&self) -> bool {
        if self.genus == 0 {
            return self.coeffs == vec![BigInt::one()];
        }
        let a1 = &self.coeffs[1];
        let g = BigInt::from(self.genus);
        a1 * a1 <= BigInt::from(4) * &g * &g * BigInt::from(self.q)
    }

    /// Companion matrix of u^{2g}·P(1/u) = Π(u − α_i).
    pub fn companion(&self) -> Vec<Vec<BigInt>> {
        let d = self.degree();
        let mut a = vec![vec![BigInt::zero(); d]; d];
        for i in 1..d {
            a[i][i - 1] = BigInt::one();
        }
        for j in 0..d {
            // coefficient of u^j in the reciprocal polynomial is c_{d−j}
            a[j][d - 1] = -self.coeffs[d - j].clone();
        }
        a
    }

    /// Π(1 − α_i^N) from the power sums s_N, s_{2N}, …
    pub fn layer_by_power_sums(&self, big_n: u64) -> BigInt {
        let d = self.degree();
        if d == 0 {
            return BigInt::one();
        }
        let s = self.power_sums(d * big_n as usize);
        let t: Vec<&BigInt> = (1..=d).map(|j| &s[j * big_n as usize - 1]).collect();
        let mut e = vec![BigInt::one()];
        for k in 1..=d {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                acc -= t[i - 1] * &e[k - i];
            }
            let (quot, r) = acc.div_rem(&BigInt::from(k));
            debug_assert!(r.is_zero());
            e.push(quot);
        }
        e.into_iter().sum()
    }

    /// det(I − A^N) for the companion matrix A.
    pub fn layer_by_companion(&self, big_n: u64) -> BigInt {
        let d = self.degree();
        if d == 0 {
            return BigInt::one();
        }
        let an = mat_pow(&self.companion(), big_n);
        let mut m = vec![vec![BigInt::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = if i == j { BigInt::one() } else { BigInt::zero() } - &an[i][j];
            }
        }
        det_bareiss(m)
    }

    /// Π_{ζ^{p^n}=1} P(ζ) as a product of norms from Z[ζ_{p^j}], j ≤ n.
    pub fn layer_by_cyclotomic_norms(&self, p: u64, n: u32) -> BigInt {
        let mut acc = BigInt::one();
        for j in 0..=n {
            let zeta = CycloExact::zeta_pow(p, j, 1);
            let mut v = CycloExact::zero(p, j);
            for c in self.coeffs.iter().rev() {
                v = v.mul(&zeta).add(&CycloExact::from_int(p, j, c.clone()));
            }
            acc *= v.norm();
        }
        acc
    }
}

/// h(F_n) for the degree-p^n constant field extension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassNumberLayer {
    pub p: u64,
    pub n: u32,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub h: BigInt,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub by_power_sums: BigInt,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub by_companion: BigInt,
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub by_cyclotomic_norms: Option<BigInt>,
}

/// Largest n for which the exact cyclotomic route is also run.
pub const CYCLOTOMIC_ROUTE_MAX_LEVEL: u32 = 2;

pub fn class_number_layer(zeta: &ZetaNumerator, p: u64, n: u32) -> Result<ClassNumberLayer> {
    arith::require_prime(p)?;
    let big_n = arith::checked_pow(p, n).ok_or_else(|| Error::Overflow(format!("{p}^{n}")))?;
    let by_power_sums = zeta.layer_by_power_sums(big_n);
    let by_companion = zeta.layer_by_companion(big_n);
    if by_power_sums != by_companion {
        return Err(Error::cross(format!(
            "h(F_{n}): power sums give {by_power_sums}, companion determinant gives {by_companion}"
        )));
    }
    let by_cyclotomic_norms =
        (n <= CYCLOTOMIC_ROUTE_MAX_LEVEL).then(|| zeta.layer_by_cyclotomic_norms(p, n));
    if let Some(c) = &by_cyclotomic_norms {
        if *c != by_power_sums {
            return Err(Error::cross(format!("h(F_{n}): cyclotomic norms give {c}, power sums {by_power_sums}")));
        }
    }
    if !by_power_sums.is_positive() {
        return Err(Error::cross(format!("h(F_{n}) = {by_power_sums} is not positive")));
    }
    Ok(ClassNumberLayer { p, n, h: by_power_sums.clone(), by_power_sums, by_companion, by_cyclotomic_norms })
}

/// Π(1 − α_i^N) by power sums and by the companion determinant; errors on disagreement.
pub fn layer_determinant(zeta: &ZetaNumerator, big_n: u64) -> Result<BigInt> {
    let a = zeta.layer_by_power_sums(big_n);
    let b = zeta.layer_by_companion(big_n);
    if a != b {
        return Err(Error::cross(format!("det(I − A^{big_n}): {a} vs {b}")));
    }
    Ok(a)
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

fn mat_pow(a: &[Vec<BigInt>], mut e: u64) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut result: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &b);
        }
        b = mat_mul(&b, &b);
        e >>= 1;
    }
    result
}

/// Fraction-free Gaussian elimination.
pub fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn elliptic_numerators() {
        let z = ZetaNumerator::from_counts(5, 1, &[4, 32]).unwrap();
        assert_eq!(z.coeffs, ints(&[1, -2, 5]));
        let z2 = ZetaNumerator::from_counts(2, 1, &[3]).unwrap();
        assert_eq!(z2.coeffs, ints(&[1, 0, 2]));
        assert!(ZetaNumerator::from_counts(5, 1, &[4, 31]).is_err());
        assert_eq!(ZetaNumerator::from_counts(5, 0, &[6, 26]).unwrap(), ZetaNumerator::trivial(5));
    }

    #[test]
    fn tower_class_numbers() {
        let z = ZetaNumerator { q: 5, genus: 1, coeffs: ints(&[1, -2, 5]) };
        let hs: Vec<BigInt> = (0..=2).map(|n| class_number_layer(&z, 3, n).unwrap().h).collect();
        assert_eq!(hs, ints(&[4, 148, 1955524]));
        let z2 = ZetaNumerator { q: 2, genus: 1, coeffs: ints(&[1, 0, 2]) };
        assert_eq!(class_number_layer(&z2, 3, 1).unwrap().h, BigInt::from(9));
        assert_eq!(class_number_layer(&ZetaNumerator::trivial(5), 3, 2).unwrap().h, BigInt::one());
    }

    #[test]
    fn bareiss_small() {
        let m = vec![ints(&[2, 0, 1]), ints(&[1, 3, 2]), ints(&[1, 1, 2])];
        assert_eq!(det_bareiss(m), BigInt::from(6));
        let m = vec![ints(&[0, 1]), ints(&[1, 0])];
        assert_eq!(det_bareiss(m), BigInt::from(-1));
    }
}
