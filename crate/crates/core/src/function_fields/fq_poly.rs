//! Dense polynomials over an FqField, constant term first, trailing zeros trimmed.

use super::fq::{Fq, FqField};

pub type FqPoly = Vec<Fq>;

pub fn trim(a: &mut FqPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[Fq]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn is_monic(a: &[Fq]) -> bool {
    a.last() == Some(&1)
}

pub fn add(f: &FqField, a: &[Fq], b: &[Fq]) -> FqPoly {
    let n = a.len().max(b.len());
    let mut out: FqPoly = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut out);
    out
}

pub fn sub(f: &FqField, a: &[Fq], b: &[Fq]) -> FqPoly {
    let n = a.len().max(b.len());
    let mut out: FqPoly = (0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut out);
    out
}

pub fn scale(f: &FqField, a: &[Fq], c: Fq) -> FqPoly {
    let mut out: FqPoly = a.iter().map(|&x| f.mul(x, c)).collect();
    trim(&mut out);
    out
}

pub fn mul(f: &FqField, a: &[Fq], b: &[Fq]) -> FqPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; panics on a zero divisor.
pub fn divrem(f: &FqField, a: &[Fq], b: &[Fq]) -> (FqPoly, FqPoly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
    let mut r: FqPoly = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![0; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = f.mul(r[i], lead_inv);
        if c == 0 {
            continue;
        }
        quot[i - db] = c;
        for j in 0..=db {
            r[i - db + j] = f.sub(r[i - db + j], f.mul(c, b[j]));
        }
    }
    trim(&mut r);
    trim(&mut quot);
    (quot, r)
}

pub fn rem(f: &FqField, a: &[Fq], b: &[Fq]) -> FqPoly {
    divrem(f, a, b).1
}

/// Monic gcd (empty when both inputs vanish).
pub fn gcd(f: &FqField, a: &[Fq], b: &[Fq]) -> FqPoly {
    let mut x: FqPoly = a.to_vec();
    let mut y: FqPoly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(&lead) = x.last() {
        let inv = f.inv(lead).expect("nonzero");
        x = scale(f, &x, inv);
    }
    x
}

pub fn derivative(f: &FqField, a: &[Fq]) -> FqPoly {
    let mut out: FqPoly = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
        .collect();
    trim(&mut out);
    out
}

pub fn eval(f: &FqField, a: &[Fq], x: Fq) -> Fq {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

pub fn mulmod(f: &FqField, a: &[Fq], b: &[Fq], m: &[Fq]) -> FqPoly {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod(f: &FqField, base: &[Fq], mut e: u128, m: &[Fq]) -> FqPoly {
    let mut result = rem(f, &[1], m);
    let mut b = rem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(f, &result, &b, m);
        }
        b = mulmod(f, &b, &b, m);
        e >>= 1;
    }
    result
}

/// Ben-Or: a of degree d is irreducible iff gcd(x^{q^i} − x, a) = 1 for i ≤ d/2.
pub fn is_irreducible(f: &FqField, a: &[Fq]) -> bool {
    let d = match degree(a) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    let x: FqPoly = vec![0, 1];
    let mut xq = rem(f, &x, a);
    for _ in 1..=d / 2 {
        xq = powmod(f, &xq, f.size() as u128, a);
        let g = gcd(f, &sub(f, &xq, &x), a);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Index of a monic polynomial of degree d among all monic polynomials of degree d:
/// the lower coefficients read as base-q digits.
pub fn monic_index(f: &FqField, a: &[Fq]) -> u64 {
    let q = f.size();
    a[..a.len() - 1].iter().rev().fold(0, |acc, &c| acc * q + c as u64)
}

pub fn monic_from_index(f: &FqField, d: usize, mut idx: u64) -> FqPoly {
    let q = f.size();
    let mut out = Vec::with_capacity(d + 1);
    for _ in 0..d {
        out.push((idx % q) as Fq);
        idx /= q;
    }
    out.push(1);
    out
}

/// Renders a polynomial in the variable t with index coefficients.
pub fn format(a: &[Fq]) -> String {
    if a.is_empty() {
        return "0".into();
    }
    let mut terms = Vec::new();
    for (i, &c) in a.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        let var = match i {
            0 => String::new(),
            1 => "t".into(),
            _ => format!("t^{i}"),
        };
        terms.push(format!("{coeff}{var}"));
    }
    terms.join("+")
}
