//! Dense univariate polynomials over Z/ℓ^K, little-endian coefficient vectors.

use super::zl::Zl;

pub type Poly = Vec<u128>;

pub fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[u128]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn add(r: &Zl, a: &[u128], b: &[u128]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push(r.add(x, y));
    }
    trim(&mut out);
    out
}

pub fn sub(r: &Zl, a: &[u128], b: &[u128]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push(r.sub(x, y));
    }
    trim(&mut out);
    out
}

pub fn scale(r: &Zl, a: &[u128], c: u128) -> Poly {
    let mut out: Poly = a.iter().map(|&x| r.mul(x, c)).collect();
    trim(&mut out);
    out
}

pub fn mul(r: &Zl, a: &[u128], b: &[u128]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = r.add(out[i + j], r.mul(x, y));
            }
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder by a monic divisor.
pub fn divrem_monic(r: &Zl, a: &[u128], m: &[u128]) -> (Poly, Poly) {
    let dm = m.len() - 1;
    debug_assert_eq!(m[dm], 1, "divisor must be monic");
    let mut rem: Poly = a.to_vec();
    trim(&mut rem);
    if rem.len() <= dm {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u128; rem.len() - dm];
    for i in (dm..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        quot[i - dm] = c;
        for j in 0..dm {
            if m[j] != 0 {
                rem[i - dm + j] = r.sub(rem[i - dm + j], r.mul(c, m[j]));
            }
        }
        rem[i] = 0;
    }
    trim(&mut rem);
    trim(&mut quot);
    (quot, rem)
}

pub fn rem_monic(r: &Zl, a: &[u128], m: &[u128]) -> Poly {
    divrem_monic(r, a, m).1
}

pub fn mulmod(r: &Zl, a: &[u128], b: &[u128], m: &[u128]) -> Poly {
    rem_monic(r, &mul(r, a, b), m)
}

pub fn powmod(r: &Zl, base: &[u128], mut exp: u128, m: &[u128]) -> Poly {
    let mut result = rem_monic(r, &[1], m);
    let mut b = rem_monic(r, base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod(r, &result, &b, m);
        }
        b = mulmod(r, &b, &b, m);
        exp >>= 1;
    }
    result
}

/// Scales to a monic polynomial; requires a unit leading coefficient.
pub fn make_monic(r: &Zl, a: &[u128]) -> Option<Poly> {
    let d = degree(a)?;
    let inv = r.inv(a[d])?;
    Some(scale(r, &a[..=d], inv))
}

/// Division over a field (precision 1) with arbitrary nonzero divisor.
pub fn divrem_field(r: &Zl, a: &[u128], b: &[u128]) -> (Poly, Poly) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = r.inv(b[db]).expect("field division");
    let monic = scale(r, &b[..=db], lead_inv);
    let (q, rem) = divrem_monic(r, a, &monic);
    (scale(r, &q, lead_inv), rem)
}

/// Monic gcd over a field.
pub fn gcd_field(r: &Zl, a: &[u128], b: &[u128]) -> Poly {
    let mut x: Poly = a.to_vec();
    let mut y: Poly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, rem) = divrem_field(r, &x, &y);
        x = y;
        y = rem;
    }
    make_monic(r, &x).unwrap_or_default()
}

/// Returns (g, s, t) with s·a + t·b = g monic, over a field.
pub fn ext_gcd_field(r: &Zl, a: &[u128], b: &[u128]) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1): (Poly, Poly) = (vec![1], Vec::new());
    let (mut t0, mut t1): (Poly, Poly) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, rem) = divrem_field(r, &r0, &r1);
        let s2 = sub(r, &s0, &mul(r, &q, &s1));
        let t2 = sub(r, &t0, &mul(r, &q, &t1));
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let d = degree(&r0).expect("gcd of zero polynomials");
    let inv = r.inv(r0[d]).expect("field");
    (scale(r, &r0, inv), scale(r, &s0, inv), scale(r, &t0, inv))
}

/// Φ_{p^n}(x) = Σ_{i<p} x^{i·p^{n−1}}; for n = 0 this is x − 1 (as residues in `r`).
pub fn cyclotomic_prime_power(r: &Zl, p: u64, n: u32) -> Poly {
    if n == 0 {
        return vec![r.neg(1), 1];
    }
    let step = p.pow(n - 1) as usize;
    let mut out = vec![0u128; (p as usize - 1) * step + 1];
    for i in 0..p as usize {
        out[i * step] = 1;
    }
    out
}

/// Substitutes x ↦ x^k.
pub fn substitute_power(a: &[u128], k: usize) -> Poly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; (a.len() - 1) * k + 1];
    for (i, &c) in a.iter().enumerate() {
        out[i * k] = c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_round_trip() {
        let r = Zl::new(5, 3).unwrap();
        let a = vec![3, 0, 7, 11, 1];
        let m = vec![2, 1, 1];
        let (q, rem) = divrem_monic(&r, &a, &m);
        assert_eq!(add(&r, &mul(&r, &q, &m), &rem), a);
    }

    #[test]
    fn extended_gcd_mod_two() {
        let f = Zl::new(2, 1).unwrap();
        // x^2 + x + 1 and x + 1 are coprime over F_2
        let (g, s, t) = ext_gcd_field(&f, &[1, 1, 1], &[1, 1]);
        assert_eq!(g, vec![1]);
        let comb = add(&f, &mul(&f, &s, &[1, 1, 1]), &mul(&f, &t, &[1, 1]));
        assert_eq!(comb, vec![1]);
    }

    #[test]
    fn cyclotomic_shapes() {
        let r = Zl::new(7, 2).unwrap();
        assert_eq!(cyclotomic_prime_power(&r, 3, 1), vec![1, 1, 1]);
        assert_eq!(cyclotomic_prime_power(&r, 2, 2), vec![1, 0, 1]);
        assert_eq!(cyclotomic_prime_power(&r, 3, 0), vec![48, 1]);
    }
}
