//! Truncated Stickelberger series in Z[Γ_n][u]/(u^{D+1}) and exact character evaluation.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::assignment::{ClassCounts, StickelbergerInput};
use crate::character_lattice::GammaQuotient;
use crate::coeff_rings::CycloExact;
use crate::error::{Error, Result};
use crate::function_fields::Place;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StickSeries {
    quotient: GammaQuotient,
    truncation: u32,
    /// coeffs[k][γ]: coefficient of γ·u^k.
    coeffs: Vec<Vec<BigInt>>,
    modified: bool,
}

impl StickSeries {
    fn one(quotient: GammaQuotient, truncation: u32) -> Self {
        let size = quotient.len();
        let mut coeffs = vec![vec![BigInt::zero(); size]; truncation as usize + 1];
        coeffs[0][0] = BigInt::one();
        StickSeries { quotient, truncation, coeffs, modified: false }
    }

    pub fn quotient(&self) -> GammaQuotient {
        self.quotient
    }

    pub fn level(&self) -> u32 {
        self.quotient.n
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn is_modified(&self) -> bool {
        self.modified
    }

    pub fn coeffs(&self) -> &[Vec<BigInt>] {
        &self.coeffs
    }

    /// Number of stored u-degrees (D + 1, or the detected degree + 1 after modification).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Multiplies by (1 − γ u^δ)^{−c} = Σ_j C(c+j−1, j)·γ^j·u^{δj}.
    fn mul_inverse_factor(&mut self, degree: u32, class: u64, count: &BigInt) {
        let top = self.coeffs.len() - 1;
        let steps = top / degree as usize;
        let mut binom = Vec::with_capacity(steps + 1);
        let mut shifts = Vec::with_capacity(steps + 1);
        let mut c = BigInt::one();
        let mut g = 0u64;
        for j in 0..=steps {
            if j > 0 {
                c = c * (count + BigInt::from(j - 1)) / BigInt::from(j);
                g = self.quotient.add(g, class);
            }
            binom.push(c.clone());
            shifts.push(g);
        }
        let q = self.quotient;
        let src = &self.coeffs;
        let size = q.len();
        let out: Vec<Vec<BigInt>> = (0..=top)
            .into_par_iter()
            .map(|k| {
                let mut row = vec![BigInt::zero(); size];
                for j in 0..=(k / degree as usize) {
                    let from = &src[k - j * degree as usize];
                    for (gamma, a) in from.iter().enumerate() {
                        if !a.is_zero() {
                            row[q.add(gamma as u64, shifts[j]) as usize] += a * &binom[j];
                        }
                    }
                }
                row
            })
            .collect();
        self.coeffs = out;
    }

    /// Multiplies by (1 − c·γ·u^δ), truncating at the stored length.
    fn mul_linear_factor(&mut self, degree: u32, class: u64, c: &BigInt) {
        let q = self.quotient;
        let d = degree as usize;
        for k in (d..self.coeffs.len()).rev() {
            let (lo, hi) = self.coeffs.split_at_mut(k);
            let from = &lo[k - d];
            for (gamma, a) in from.iter().enumerate() {
                if !a.is_zero() {
                    hi[0][q.add(gamma as u64, class) as usize] -= a * c;
                }
            }
        }
    }

    /// Image under Γ_n → Γ_m.
    pub fn project(&self, m: u32) -> StickSeries {
        assert!(m <= self.level());
        let target = self.quotient.at_level(m);
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut out = vec![BigInt::zero(); target.len()];
                for (gamma, a) in row.iter().enumerate() {
                    out[self.quotient.project(gamma as u64, m) as usize] += a;
                }
                out
            })
            .collect();
        StickSeries { quotient: target, truncation: self.truncation, coeffs, modified: self.modified }
    }

    /// χ_a applied coefficientwise: a polynomial in u over Z[ζ_{p^n}].
    pub fn char_poly(&self, a: &[u64]) -> Vec<CycloExact> {
        let q = self.quotient;
        let order = q.modulus() as usize;
        let values: Vec<u64> = (0..q.len() as u64).map(|g| q.pairing(a, &q.to_vec(g))).collect();
        let mut out: Vec<CycloExact> = self
            .coeffs
            .iter()
            .map(|row| {
                let mut v = vec![BigInt::zero(); order];
                for (gamma, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        v[values[gamma] as usize] += c;
                    }
                }
                CycloExact::from_exponent_vector(q.p, q.n, v)
            })
            .collect();
        trim_poly(&mut out);
        out
    }

    /// χ_a(Θ)(1); requires the polynomial (modified) form.
    pub fn char_eval(&self, a: &[u64]) -> Result<CycloExact> {
        if !self.modified {
            return Err(Error::invalid("evaluation at u = 1 needs the v0-modified series"));
        }
        Ok(eval_at_one(&self.char_poly(a), self.quotient))
    }
}

pub(crate) fn trim_poly(p: &mut Vec<CycloExact>) {
    while p.last().is_some_and(CycloExact::is_zero) {
        p.pop();
    }
}

pub(crate) fn eval_at_one(poly: &[CycloExact], q: GammaQuotient) -> CycloExact {
    poly.iter().fold(CycloExact::zero(q.p, q.n), |acc, c| acc.add(c))
}

/// Π_{δ, γ}(1 − γ u^δ)^{−count} truncated at degree D.
pub fn series_from_counts(quotient: GammaQuotient, counts: &ClassCounts, truncation: u32) -> Result<StickSeries> {
    if counts.len() < truncation as usize {
        return Err(Error::Truncation(format!(
            "place data reaches degree {} but D = {truncation}",
            counts.len()
        )));
    }
    let mut s = StickSeries::one(quotient, truncation);
    for (i, classes) in counts.iter().take(truncation as usize).enumerate() {
        for (&class, count) in classes {
            if !count.is_zero() {
                s.mul_inverse_factor(i as u32 + 1, class, count);
            }
        }
    }
    Ok(s)
}

/// Θ_S(u) = Π_{v∉S}(1 − Fr_v u^{deg v})^{−1}, truncated at degree D.
pub fn build_series(input: &StickelbergerInput, truncation: u32) -> Result<StickSeries> {
    if truncation == 0 {
        return Err(Error::Truncation("D must be positive".into()));
    }
    let counts = input.assignment.class_counts(truncation, &input.s)?;
    series_from_counts(input.assignment.quotient(), &counts, truncation)
}

/// Multiplies by (1 − Fr_{v_0}(qu)^{deg v_0}) and certifies the polynomial form: every
/// coefficient past the degree bound must vanish.
pub fn modify_v0(series: &StickSeries, input: &StickelbergerInput) -> Result<StickSeries> {
    if series.modified {
        return Err(Error::invalid("series is already v0-modified"));
    }
    if series.quotient != input.assignment.quotient() {
        return Err(Error::invalid("series and assignment sit at different levels"));
    }
    let bound = input.degree_bound();
    if series.truncation < bound + 1 {
        return Err(Error::Truncation(format!(
            "D = {} is below the degree bound {bound} + 1",
            series.truncation
        )));
    }
    let v0 = &input.v0;
    let class = input
        .assignment
        .class_of(v0)?
        .ok_or_else(|| Error::invalid("v0 must be unramified"))?;
    let qd = num_traits::pow(BigInt::from(input.assignment.q()), v0.degree() as usize);
    let mut out = series.clone();
    out.mul_linear_factor(v0.degree(), class, &qd);
    if let Some(k) = (bound as usize + 1..out.coeffs.len()).find(|&k| out.coeffs[k].iter().any(|c| !c.is_zero())) {
        return Err(Error::Truncation(format!(
            "coefficient of u^{k} does not vanish (degree bound {bound}, D = {})",
            series.truncation
        )));
    }
    let detected = out.coeffs.iter().rposition(|row| row.iter().any(|c| !c.is_zero())).unwrap_or(0);
    out.coeffs.truncate(detected + 1);
    out.modified = true;
    Ok(out)
}

/// χ(v) for a place: 0 at a ramified place unless χ is trivial.
pub fn character_at_place(input: &StickelbergerInput, a: &[u64], v: &Place) -> Result<CycloExact> {
    let q = input.assignment.quotient();
    Ok(match input.assignment.class_of(v)? {
        Some(g) => CycloExact::zeta_pow(q.p, q.n, q.pairing(a, &q.to_vec(g)) as i128),
        None if a.iter().all(|&x| x % q.modulus() == 0) => CycloExact::one(q.p, q.n),
        None => CycloExact::zero(q.p, q.n),
    })
}

/// Exact quotient of N(u) by (1 − c·u), or `None` when it leaves a remainder.
pub fn divide_linear(num: &[CycloExact], c: &CycloExact) -> Option<Vec<CycloExact>> {
    let Some(last) = num.len().checked_sub(1) else {
        return Some(Vec::new());
    };
    let mut b: Vec<CycloExact> = Vec::with_capacity(num.len());
    for (k, a) in num.iter().enumerate() {
        let next = if k == 0 { a.clone() } else { a.add(&c.mul(&b[k - 1])) };
        b.push(next);
    }
    if !b[last].is_zero() {
        return None;
    }
    b.pop();
    trim_poly(&mut b);
    Some(b)
}

fn poly_mul(a: &[CycloExact], b: &[CycloExact], q: GammaQuotient) -> Vec<CycloExact> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![CycloExact::zero(q.p, q.n); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    trim_poly(&mut out);
    out
}

/// 1 − c·u^δ.
fn binomial(c: CycloExact, degree: u32, q: GammaQuotient) -> Vec<CycloExact> {
    let mut out = vec![CycloExact::zero(q.p, q.n); degree as usize + 1];
    out[0] = CycloExact::one(q.p, q.n);
    out[degree as usize] = c.neg();
    out
}

/// P(ζu)·(1 − χ(v_0)(qu)^{deg v_0})·Π_S(1 − χ(v)u^{deg v}) / ((1 − ζu)(1 − qζu)) by
/// exact division, where ζ = χ(place of degree 1). Available for every character of the
/// arithmetic tower and for the trivial character of any tower.
pub fn closed_form_poly(input: &StickelbergerInput, a: &[u64]) -> Result<Option<Vec<CycloExact>>> {
    let assignment = &input.assignment;
    let q = assignment.quotient();
    let trivial = a.iter().all(|&x| x % q.modulus() == 0);
    if !trivial && assignment.kind() != super::assignment::TowerKind::Arithmetic {
        return Ok(None);
    }
    let zeta = CycloExact::zeta_pow(q.p, q.n, if trivial { 0 } else { a[0] as i128 });
    let zeta_numerator = assignment.zeta();
    let mut num: Vec<CycloExact> = zeta_numerator
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| zeta.pow(k as u64).scale(c))
        .collect();
    let qd = num_traits::pow(BigInt::from(assignment.q()), input.v0.degree() as usize);
    let chi_v0 = character_at_place(input, a, &input.v0)?;
    num = poly_mul(&num, &binomial(chi_v0.scale(&qd), input.v0.degree(), q), q);
    for v in &input.s {
        let chi_v = character_at_place(input, a, v)?;
        num = poly_mul(&num, &binomial(chi_v, v.degree(), q), q);
    }
    let qz = zeta.scale(&BigInt::from(assignment.q()));
    let out = divide_linear(&num, &zeta)
        .and_then(|n| divide_linear(&n, &qz))
        .ok_or_else(|| Error::cross(format!("closed form for χ = {a:?} is not a polynomial")))?;
    Ok(Some(out))
}

/// Compares the Euler-product polynomial with the closed form; errors on mismatch.
pub fn two_route_check(input: &StickelbergerInput, series: &StickSeries, a: &[u64]) -> Result<bool> {
    let Some(closed) = closed_form_poly(input, a)? else {
        return Ok(false);
    };
    let euler = series.char_poly(a);
    if euler != closed {
        return Err(Error::cross(format!(
            "χ = {a:?}: Euler product gives {:?}, closed form {:?}",
            euler.iter().map(ToString::to_string).collect::<Vec<_>>(),
            closed.iter().map(ToString::to_string).collect::<Vec<_>>()
        )));
    }
    Ok(true)
}

/// Runs the two-route check over every character; returns how many had a closed form.
pub fn two_route_check_all(input: &StickelbergerInput, series: &StickSeries) -> Result<usize> {
    let q = series.quotient();
    (0..q.len() as u64)
        .into_par_iter()
        .map(|i| two_route_check(input, series, &q.to_vec(i)).map(usize::from))
        .try_reduce(|| 0, |x, y| Ok(x + y))
}

/// C(c + j − 1, j) for the counts used in tests.
pub fn multiset_count(c: &BigInt, j: u64) -> BigInt {
    (0..j).fold(BigInt::one(), |acc, i| acc * (c + BigInt::from(i)) / BigInt::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_fields::{Curve, PlaceDescriptor};
    use crate::stickelberger::assignment::FrobeniusAssignment;

    fn genus0(n: u32) -> StickelbergerInput {
        let a = FrobeniusAssignment::arithmetic(&Curve::projective_line(5).unwrap(), 3, n).unwrap();
        StickelbergerInput::from_descriptors(a, &["t".parse().unwrap()], &"t-1".parse().unwrap()).unwrap()
    }

    #[test]
    fn level_zero_expansion() {
        // 1/((1−u)(1−5u))·(1 − u) = 1/(1 − 5u)
        let input = genus0(0);
        let s = build_series(&input, 2).unwrap();
        let flat: Vec<BigInt> = s.coeffs().iter().map(|r| r[0].clone()).collect();
        assert_eq!(flat, vec![BigInt::from(1), BigInt::from(5), BigInt::from(25)]);
    }

    #[test]
    fn first_order_term_sums_frobenius() {
        let input = genus0(1);
        let s = build_series(&input, 1).unwrap();
        // five degree-1 places outside S, each with Frobenius 1 ∈ Z/3
        assert_eq!(s.coeffs()[1], vec![BigInt::from(0), BigInt::from(5), BigInt::from(0)]);
    }

    #[test]
    fn genus0_values_are_one() {
        let input = genus0(1);
        let s = build_series(&input, input.default_truncation()).unwrap();
        let m = modify_v0(&s, &input).unwrap();
        assert_eq!(m.len(), 1);
        for a in 0..3 {
            assert_eq!(m.char_eval(&[a]).unwrap(), CycloExact::one(3, 1));
        }
        assert_eq!(two_route_check_all(&input, &m).unwrap(), 3);
    }

    #[test]
    fn truncation_below_bound() {
        let e = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
        let a = FrobeniusAssignment::arithmetic(&e, 3, 1).unwrap();
        let d1: PlaceDescriptor = "deg:1".parse().unwrap();
        let input = StickelbergerInput::from_descriptors(a, std::slice::from_ref(&d1), &d1).unwrap();
        let s = build_series(&input, 2).unwrap();
        assert!(matches!(modify_v0(&s, &input), Err(Error::Truncation(_))));
        let s = build_series(&input, 3).unwrap();
        let m = modify_v0(&s, &input).unwrap();
        assert_eq!(two_route_check_all(&input, &m).unwrap(), 3);
    }

    #[test]
    fn projection_commutes_with_building() {
        let input = genus0(2);
        let s2 = build_series(&input, 6).unwrap();
        let s1 = build_series(&input.restrict(1).unwrap(), 6).unwrap();
        assert_eq!(s2.project(1), s1);
    }

    #[test]
    fn linear_division() {
        let q = GammaQuotient::new(3, 1, 1).unwrap();
        let z = CycloExact::zeta_pow(3, 1, 1);
        let f = poly_mul(&binomial(z.clone(), 1, q), &binomial(CycloExact::from_int(3, 1, 7), 2, q), q);
        assert_eq!(divide_linear(&f, &z).unwrap(), binomial(CycloExact::from_int(3, 1, 7), 2, q));
        assert!(divide_linear(&f, &z.pow(2)).is_none());
        assert_eq!(multiset_count(&BigInt::from(5), 2), BigInt::from(15));
    }
}
