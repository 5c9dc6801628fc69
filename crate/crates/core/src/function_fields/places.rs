//! Places: degree ledgers b_δ, monic irreducibles of F_q[t], and place descriptors.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::fq::{Fq, FqField};
use super::fq_poly::{self, FqPoly};
use super::zeta::ZetaNumerator;
use crate::arith;
use crate::error::{Error, Result};

/// Largest q^D the irreducible sieve allocates for.
pub const SIEVE_BUDGET: u64 = 1 << 23;

/// Number of monic irreducibles of degree d over F_q.
pub fn monic_irreducible_count(q: u64, d: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for e in arith::divisors(d as u64) {
        let mu = arith::mobius(d as u64 / e);
        if mu != 0 {
            acc += BigInt::from(mu) * num_traits::pow(BigInt::from(q), e as usize);
        }
    }
    acc / BigInt::from(d)
}

/// b_1, …, b_D: the number of places of each degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceLedger {
    pub q: u64,
    #[serde(serialize_with = "crate::bigjson::ints")]
    pub counts: Vec<BigInt>,
}

impl PlaceLedger {
    /// F_q(t): monic irreducibles plus the place at infinity.
    pub fn rational(q: u64, max_degree: u32) -> Self {
        let counts = (1..=max_degree)
            .map(|d| monic_irreducible_count(q, d) + if d == 1 { 1 } else { 0 })
            .collect();
        PlaceLedger { q, counts }
    }

    /// Möbius inversion of N_m = Σ_{δ|m} δ·b_δ with N_m read off P(u).
    pub fn from_zeta(zeta: &ZetaNumerator, max_degree: u32) -> Result<Self> {
        let n: Vec<BigInt> = (1..=max_degree).map(|m| zeta.point_count(m)).collect();
        Self::from_point_counts(zeta.q, &n)
    }

    pub fn from_point_counts(q: u64, n: &[BigInt]) -> Result<Self> {
        let mut counts = Vec::with_capacity(n.len());
        for d in 1..=n.len() as u64 {
            let mut acc = BigInt::zero();
            for e in arith::divisors(d) {
                acc += BigInt::from(arith::mobius(d / e)) * &n[e as usize - 1];
            }
            let (b, r) = acc.div_rem(&BigInt::from(d));
            if !r.is_zero() || b.is_negative() {
                return Err(Error::cross(format!("degree-{d} place count {acc}/{d} is not a natural number")));
            }
            counts.push(b);
        }
        let ledger = PlaceLedger { q, counts };
        ledger.mobius_check(n)?;
        Ok(ledger)
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn count(&self, d: u32) -> BigInt {
        self.counts.get(d as usize - 1).cloned().unwrap_or_default()
    }

    /// N_m = Σ_{δ|m} δ·b_δ for every m the ledger covers.
    pub fn mobius_check(&self, n: &[BigInt]) -> Result<()> {
        for m in 1..=n.len().min(self.counts.len()) as u64 {
            let total: BigInt =
                arith::divisors(m).into_iter().map(|d| BigInt::from(d) * &self.counts[d as usize - 1]).sum();
            if total != n[m as usize - 1] {
                return Err(Error::cross(format!("Σ δ·b_δ over δ | {m} is {total}, N_{m} = {}", n[m as usize - 1])));
            }
        }
        Ok(())
    }
}

/// All monic irreducibles of degree ≤ D over F_q, by sieving out products.
pub fn monic_irreducibles(field: &FqField, max_degree: u32) -> Result<Vec<Vec<FqPoly>>> {
    let q = field.size();
    if arith::checked_pow(q, max_degree).is_none_or(|s| s > SIEVE_BUDGET) {
        return Err(Error::Budget(format!("sieving degree {max_degree} over F_{q} exceeds {SIEVE_BUDGET}")));
    }
    let mut by_degree: Vec<Vec<FqPoly>> = vec![Vec::new(); max_degree as usize + 1];
    for d in 1..=max_degree as usize {
        let size = q.pow(d as u32);
        let mut reducible = vec![false; size as usize];
        for a in 1..=d / 2 {
            let b = d - a;
            let count_b = q.pow(b as u32);
            for f in &by_degree[a] {
                for gi in 0..count_b {
                    let g = fq_poly::monic_from_index(field, b, gi);
                    let prod = fq_poly::mul(field, f, &g);
                    reducible[fq_poly::monic_index(field, &prod) as usize] = true;
                }
            }
        }
        by_degree[d] = (0..size)
            .filter(|&i| !reducible[i as usize])
            .map(|i| fq_poly::monic_from_index(field, d, i))
            .collect();
    }
    Ok(by_degree)
}

/// A place named on the command line or in a report.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PlaceDescriptor {
    Infinity,
    /// Integer coefficients, constant term first.
    Polynomial(Vec<i64>),
    /// An unnamed place of a curve, known by its degree.
    Degree(u32),
}

impl FromStr for PlaceDescriptor {
    type Err = Error;

    /// `inf`, `deg:k`, or a polynomial in t such as `t^2+2t+1` or `t-1`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty place descriptor".into()));
        }
        if matches!(s.as_str(), "inf" | "infinity" | "∞") {
            return Ok(PlaceDescriptor::Infinity);
        }
        if let Some(d) = s.strip_prefix("deg:") {
            let d: u32 = d.parse().map_err(|e| Error::Parse(format!("degree {d:?}: {e}")))?;
            if d == 0 || d > 64 {
                return Err(Error::Parse(format!("place degree {d} out of range")));
            }
            return Ok(PlaceDescriptor::Degree(d));
        }
        parse_polynomial(&s).map(PlaceDescriptor::Polynomial)
    }
}

fn parse_polynomial(s: &str) -> Result<Vec<i64>> {
    let bad = |why: &str| Error::Parse(format!("polynomial {s:?}: {why}"));
    let mut coeffs: Vec<i64> = Vec::new();
    let mut rest = s;
    let mut first = true;
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1i64, &rest[1..]),
            b'-' => (-1i64, &rest[1..]),
            _ if first => (1i64, rest),
            _ => return Err(bad("expected + or -")),
        };
        first = false;
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let (coeff, exp) = match term.find('t') {
            None => (term.parse::<i64>().map_err(|_| bad("bad constant"))?, 0usize),
            Some(pos) => {
                let c = term[..pos].trim_end_matches('*');
                let c = if c.is_empty() { 1 } else { c.parse::<i64>().map_err(|_| bad("bad coefficient"))? };
                let e = &term[pos + 1..];
                let e = if e.is_empty() {
                    1
                } else {
                    e.strip_prefix('^').ok_or_else(|| bad("expected ^"))?.parse::<usize>().map_err(|_| bad("bad exponent"))?
                };
                (c, e)
            }
        };
        if exp > 64 || coeff.unsigned_abs() > 1 << 32 {
            return Err(bad("term out of range"));
        }
        if coeffs.len() <= exp {
            coeffs.resize(exp + 1, 0);
        }
        coeffs[exp] += sign * coeff;
    }
    while coeffs.last() == Some(&0) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(bad("zero polynomial"));
    }
    Ok(coeffs)
}

impl fmt::Display for PlaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceDescriptor::Infinity => write!(f, "inf"),
            PlaceDescriptor::Degree(d) => write!(f, "deg:{d}"),
            PlaceDescriptor::Polynomial(c) => {
                let mut out = String::new();
                for (i, &a) in c.iter().enumerate().rev() {
                    if a == 0 {
                        continue;
                    }
                    let sign = if a < 0 { "-" } else if out.is_empty() { "" } else { "+" };
                    let mag = a.unsigned_abs();
                    let coeff = if mag == 1 && i > 0 { String::new() } else { mag.to_string() };
                    let var = match i {
                        0 => String::new(),
                        1 => "t".into(),
                        _ => format!("t^{i}"),
                    };
                    out.push_str(&format!("{sign}{coeff}{var}"));
                }
                write!(f, "{out}")
            }
        }
    }
}

/// A place resolved against a base field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Infinity,
    /// A monic irreducible of F_q[t].
    Finite(FqPoly),
    Abstract { degree: u32 },
}

impl Place {
    pub fn degree(&self) -> u32 {
        match self {
            Place::Infinity => 1,
            Place::Finite(p) => (p.len() - 1) as u32,
            Place::Abstract { degree } => *degree,
        }
    }

    /// Polynomial descriptors must be monic irreducible over F_q.
    pub fn resolve(desc: &PlaceDescriptor, field: &FqField) -> Result<Place> {
        match desc {
            PlaceDescriptor::Infinity => Ok(Place::Infinity),
            PlaceDescriptor::Degree(d) => Ok(Place::Abstract { degree: *d }),
            PlaceDescriptor::Polynomial(c) => {
                let mut poly: FqPoly = c
                    .iter()
                    .map(|&x| super::curve::coeff_to_fq(field, x))
                    .collect::<Result<Vec<Fq>>>()?;
                fq_poly::trim(&mut poly);
                if !fq_poly::is_monic(&poly) {
                    return Err(Error::invalid(format!("place {desc} is not monic over F_{}", field.size())));
                }
                if !fq_poly::is_irreducible(field, &poly) {
                    return Err(Error::invalid(format!("place {desc} is not irreducible over F_{}", field.size())));
                }
                Ok(Place::Finite(poly))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Place::Infinity => "inf".into(),
            Place::Finite(p) => fq_poly::format(p),
            Place::Abstract { degree } => format!("deg:{degree}"),
        }
    }
}
