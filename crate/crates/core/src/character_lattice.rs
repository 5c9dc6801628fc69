//! Characters of Γ_n = (Z/p^n)^d, their Frobenius orbits, and the residue degrees f_n(ℓ,p).

use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Moduli up to this size get their orders by plain repeated multiplication.
const NAIVE_ORDER_LIMIT: u64 = 1 << 22;

/// Multiplicative order of ℓ mod p^n, computed without the closed forms.
pub fn f_n_direct(ell: u64, p: u64, n: u32) -> Result<u64> {
    arith::require_ell_p(ell, p)?;
    if n == 0 {
        return Ok(1);
    }
    let m = p
        .checked_pow(n)
        .ok_or_else(|| Error::Overflow(format!("{p}^{n}")))?;
    if m <= NAIVE_ORDER_LIMIT {
        return Ok(arith::mult_order(ell, m).expect("ell is a unit"));
    }
    let phi = arith::phi_prime_power(p, n);
    let mut order = phi;
    for q in arith::prime_factors(phi) {
        while order.is_multiple_of(q) && arith::pow_mod(ell, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    OddP,
    TwoEllOneModFour,
    TwoEllThreeModFour,
}

pub fn branch(ell: u64, p: u64) -> Branch {
    if p != 2 {
        Branch::OddP
    } else if ell % 4 == 1 {
        Branch::TwoEllOneModFour
    } else {
        Branch::TwoEllThreeModFour
    }
}

/// a(ℓ,p): v_p(ℓ^{f_1} − 1) for odd p; v_2(ℓ − 1) or v_2(ℓ² − 1) for p = 2.
pub fn a_ell_p(ell: u64, p: u64) -> Result<u32> {
    arith::require_ell_p(ell, p)?;
    let x: u128 = match branch(ell, p) {
        Branch::OddP => {
            let f1 = arith::mult_order(ell, p).expect("unit") as u32;
            (ell as u128).checked_pow(f1).map(|v| v - 1).unwrap_or(0)
        }
        Branch::TwoEllOneModFour => ell as u128 - 1,
        Branch::TwoEllThreeModFour => (ell as u128) * (ell as u128) - 1,
    };
    if x != 0 {
        return Ok(arith::v_p(x, p).expect("nonzero"));
    }
    // ℓ^{f_1} overflowed: find the valuation by testing ℓ^{f_1} ≡ 1 mod p^k
    let f1 = arith::mult_order(ell, p).expect("unit");
    let mut k = 1u32;
    while let Some(m) = p.checked_pow(k + 1) {
        if arith::pow_mod(ell, f1, m) != 1 {
            return Ok(k);
        }
        k += 1;
    }
    Err(Error::Overflow(format!("a({ell},{p})")))
}

/// f_n(ℓ,p) from the closed forms.
pub fn f_n_closed(ell: u64, p: u64, n: u32) -> Result<u64> {
    let a = a_ell_p(ell, p)?;
    if n == 0 {
        return Ok(1);
    }
    let pow = |e: u32| p.checked_pow(e).ok_or_else(|| Error::Overflow(format!("{p}^{e}")));
    match branch(ell, p) {
        Branch::OddP => {
            let f1 = arith::mult_order(ell, p).expect("unit");
            if n <= a {
                Ok(f1)
            } else {
                f1.checked_mul(pow(n - a)?).ok_or_else(|| Error::Overflow("f_n".into()))
            }
        }
        Branch::TwoEllOneModFour => {
            if n <= a {
                Ok(1)
            } else {
                pow(n - a)
            }
        }
        Branch::TwoEllThreeModFour => {
            if n == 1 {
                Ok(1)
            } else if n <= a {
                Ok(2)
            } else {
                pow(n - a + 1)
            }
        }
    }
}

/// c(ℓ,p) with f_n = c·p^n for n large, as a reduced fraction.
pub fn c_ell_p(ell: u64, p: u64) -> Result<(u64, u64)> {
    let a = a_ell_p(ell, p)?;
    let (num, den) = match branch(ell, p) {
        Branch::OddP => (arith::mult_order(ell, p).expect("unit"), p.pow(a)),
        Branch::TwoEllOneModFour => (1, 2u64.pow(a)),
        Branch::TwoEllThreeModFour => (1, 2u64.pow(a - 1)),
    };
    let g = arith::gcd(num, den);
    Ok((num / g, den / g))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FnReport {
    pub ell: u64,
    pub p: u64,
    pub n: u32,
    pub f: u64,
    pub a: u32,
    pub c_numerator: u64,
    pub c_denominator: u64,
    pub branch: Branch,
}

/// f_n computed directly and by the closed form; disagreement is a hard error.
pub fn f_n(ell: u64, p: u64, n: u32) -> Result<FnReport> {
    let direct = f_n_direct(ell, p, n)?;
    let closed = f_n_closed(ell, p, n)?;
    if direct != closed {
        return Err(Error::cross(format!(
            "f_{n}({ell},{p}): order {direct} but closed form {closed}"
        )));
    }
    let (c_numerator, c_denominator) = c_ell_p(ell, p)?;
    Ok(FnReport {
        ell,
        p,
        n,
        f: direct,
        a: a_ell_p(ell, p)?,
        c_numerator,
        c_denominator,
        branch: branch(ell, p),
    })
}

/// Γ_n = (Z/p^n)^d. Elements and characters share the index Σ a_i·(p^n)^i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GammaQuotient {
    pub p: u64,
    pub d: u32,
    pub n: u32,
}

impl GammaQuotient {
    pub fn new(p: u64, d: u32, n: u32) -> Result<Self> {
        arith::require_prime(p)?;
        if d == 0 {
            return Err(Error::invalid("dimension d must be positive"));
        }
        let q = GammaQuotient { p, d, n };
        q.size()?;
        Ok(q)
    }

    /// p^n.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    /// |Γ_n| = p^{nd}.
    pub fn size(&self) -> Result<u64> {
        self.p
            .checked_pow(self.n * self.d)
            .ok_or_else(|| Error::Overflow(format!("{}^{}", self.p, self.n * self.d)))
    }

    pub fn len(&self) -> usize {
        self.size().expect("validated") as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at_level(&self, n: u32) -> GammaQuotient {
        GammaQuotient { p: self.p, d: self.d, n }
    }

    pub fn to_vec(&self, mut index: u64) -> Vec<u64> {
        let m = self.modulus();
        (0..self.d)
            .map(|_| {
                let c = index % m;
                index /= m;
                c
            })
            .collect()
    }

    pub fn to_index(&self, v: &[u64]) -> u64 {
        let m = self.modulus();
        v.iter().rev().fold(0u64, |acc, &c| acc * m + c % m)
    }

    pub fn add(&self, x: u64, y: u64) -> u64 {
        let m = self.modulus();
        let (a, b) = (self.to_vec(x), self.to_vec(y));
        self.to_index(&a.iter().zip(&b).map(|(&u, &v)| (u + v) % m).collect::<Vec<_>>())
    }

    pub fn neg(&self, x: u64) -> u64 {
        let m = self.modulus();
        self.to_index(&self.to_vec(x).iter().map(|&u| (m - u) % m).collect::<Vec<_>>())
    }

    /// ⟨a, γ⟩ mod p^n.
    pub fn pairing(&self, a: &[u64], g: &[u64]) -> u64 {
        let m = self.modulus() as u128;
        (a.iter().zip(g).map(|(&x, &y)| x as u128 * y as u128 % m).sum::<u128>() % m.max(1)) as u64
    }

    /// Image of γ in Γ_m for m ≤ n.
    pub fn project(&self, index: u64, m: u32) -> u64 {
        let target = self.at_level(m);
        let mm = target.modulus();
        target.to_index(&self.to_vec(index).iter().map(|&c| c % mm).collect::<Vec<_>>())
    }

    /// Inclusion Γ_m^∨ ⊂ Γ_n^∨ (m ≤ n): exponents are multiplied by p^{n−m}.
    pub fn lift_character(&self, a: &[u64], m: u32) -> Vec<u64> {
        let s = self.p.pow(self.n - m);
        a.iter().map(|&x| x * s).collect()
    }
}

/// Level of a character exponent vector at level n: n − min v_p(a_i).
pub fn character_level(p: u64, n: u32, a: &[u64]) -> u32 {
    let m = p.pow(n);
    let min_v = a
        .iter()
        .filter(|&&x| x % m != 0)
        .map(|&x| arith::v_p((x % m) as u128, p).expect("nonzero"))
        .min();
    match min_v {
        None => 0,
        Some(v) => n - v,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Character {
    pub p: u64,
    pub n: u32,
    pub exponents: Vec<u64>,
}

impl Character {
    pub fn new(p: u64, n: u32, exponents: Vec<u64>) -> Self {
        let m = p.pow(n);
        Character { p, n, exponents: exponents.into_iter().map(|x| x % m).collect() }
    }

    /// m with ω(Γ) = μ_{p^m}.
    pub fn level(&self) -> u32 {
        character_level(self.p, self.n, &self.exponents)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub p: u64,
    pub n: u32,
    /// Lexicographically smallest exponent vector in the orbit.
    pub rep: Vec<u64>,
    pub members: Vec<Vec<u64>>,
    pub level: u32,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// The representative as a character of Γ_level: a = p^{n−level}·a'.
    pub fn rep_at_own_level(&self) -> Vec<u64> {
        let s = self.p.pow(self.n - self.level);
        self.rep.iter().map(|&x| x / s).collect()
    }

    pub fn contains(&self, a: &[u64]) -> bool {
        self.members.iter().any(|m| m == a)
    }
}

/// Closure of a under a ↦ ℓ·a mod p^n.
pub fn orbit_of(character: &Character, ell: u64) -> Orbit {
    let m = character.p.pow(character.n);
    let mut members = vec![character.exponents.clone()];
    loop {
        let next: Vec<u64> = members
            .last()
            .unwrap()
            .iter()
            .map(|&x| (x as u128 * ell as u128 % m as u128) as u64)
            .collect();
        if next == members[0] {
            break;
        }
        members.push(next);
    }
    members.sort();
    Orbit {
        p: character.p,
        n: character.n,
        rep: members[0].clone(),
        level: character.level(),
        members,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitTable {
    pub ell: u64,
    pub quotient: GammaQuotient,
    /// Sorted by (level, representative).
    pub orbits: Vec<Orbit>,
    /// Orbit indices per level m = 0..=n (the level sets 𝒮_m).
    pub levels: Vec<Vec<usize>>,
    /// Orbit index of every character, by character index.
    #[serde(skip)]
    pub orbit_index: Vec<u32>,
}

impl OrbitTable {
    pub fn level_set(&self, m: u32) -> impl Iterator<Item = &Orbit> {
        self.levels[m as usize].iter().map(move |&i| &self.orbits[i])
    }

    /// Index of the orbit containing the character with exponent vector a.
    pub fn find(&self, a: &[u64]) -> Option<usize> {
        if a.len() != self.quotient.d as usize {
            return None;
        }
        let m = self.quotient.modulus();
        if a.iter().any(|&x| x >= m) {
            return None;
        }
        Some(self.orbit_index[self.quotient.to_index(a) as usize] as usize)
    }

    /// Checks |𝒮_m|·f_m = p^{dm} − p^{d(m−1)} and Σ = p^{nd}.
    pub fn counting_identities(&self) -> Result<()> {
        let q = self.quotient;
        let mut total = 0u64;
        for m in 0..=q.n {
            let f = f_n(self.ell, q.p, m)?.f;
            let count = self.levels[m as usize].len() as u64;
            for o in self.level_set(m) {
                if o.size() as u64 != f {
                    return Err(Error::cross(format!("orbit {:?} has size {} not {f}", o.rep, o.size())));
                }
            }
            let expected = if m == 0 { 1 } else { q.p.pow(q.d * m) - q.p.pow(q.d * (m - 1)) };
            if count * f != expected {
                return Err(Error::cross(format!("|S_{m}|·f_{m} = {} ≠ {expected}", count * f)));
            }
            total += count * f;
        }
        if total != q.size()? {
            return Err(Error::cross("orbit sizes do not sum to |Γ_n|"));
        }
        Ok(())
    }
}

/// Partitions Γ_n^∨ into Frobenius orbits.
pub fn enumerate_orbits(ell: u64, quotient: GammaQuotient, cap: Option<u64>) -> Result<OrbitTable> {
    arith::require_ell_p(ell, quotient.p)?;
    let size = quotient.size()?;
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    if size > cap {
        return Err(Error::Budget(format!("|Γ_n| = {size} exceeds the enumeration cap {cap}")));
    }
    let mut seen = vec![false; size as usize];
    let mut orbits = Vec::new();
    for idx in 0..size {
        if seen[idx as usize] {
            continue;
        }
        let ch = Character::new(quotient.p, quotient.n, quotient.to_vec(idx));
        let orbit = orbit_of(&ch, ell);
        for m in &orbit.members {
            seen[quotient.to_index(m) as usize] = true;
        }
        orbits.push(orbit);
    }
    orbits.sort_by(|x, y| (x.level, &x.rep).cmp(&(y.level, &y.rep)));
    let mut levels = vec![Vec::new(); quotient.n as usize + 1];
    let mut orbit_index = vec![0u32; size as usize];
    for (i, o) in orbits.iter().enumerate() {
        levels[o.level as usize].push(i);
        for m in &o.members {
            orbit_index[quotient.to_index(m) as usize] = i as u32;
        }
    }
    Ok(OrbitTable { ell, quotient, orbits, levels, orbit_index })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_n_examples() {
        assert_eq!(f_n(2, 3, 1).unwrap().f, 2);
        assert_eq!(f_n(2, 3, 2).unwrap().f, 6);
        for n in 0..=2 {
            assert_eq!(f_n(5, 2, n).unwrap().f, 1);
        }
        assert_eq!(f_n(5, 2, 5).unwrap().f, 8);
        assert_eq!(f_n(7, 5, 0).unwrap().f, 1);
        assert!(f_n(3, 3, 1).is_err());
    }

    #[test]
    fn c_examples() {
        // 7 ≡ 3 mod 4, a = v_2(48) = 4: f_n = 2^{n−3}
        assert_eq!(c_ell_p(7, 2).unwrap(), (1, 8));
        assert_eq!(c_ell_p(5, 2).unwrap(), (1, 4));
        // f_1(2,3) = 2, a = 1
        assert_eq!(c_ell_p(2, 3).unwrap(), (2, 3));
    }

    #[test]
    fn divisor_order_matches_naive() {
        for &(ell, p) in &[(2u64, 3u64), (3, 7), (10007, 3), (2, 5)] {
            if !arith::is_prime(ell) {
                continue;
            }
            for n in 1..=8 {
                let m = p.pow(n);
                let phi = arith::phi_prime_power(p, n);
                let mut order = phi;
                for q in arith::prime_factors(phi) {
                    while order.is_multiple_of(q) && arith::pow_mod(ell, order / q, m) == 1 {
                        order /= q;
                    }
                }
                assert_eq!(Some(order), arith::mult_order(ell, m));
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let t = enumerate_orbits(2, GammaQuotient::new(3, 1, 1).unwrap(), None).unwrap();
        assert_eq!(t.orbits.len(), 2);
        assert_eq!(t.orbits[1].members, vec![vec![1], vec![2]]);
        let t = enumerate_orbits(2, GammaQuotient::new(3, 2, 1).unwrap(), None).unwrap();
        assert_eq!(t.orbits.len(), 5);
        assert_eq!(t.levels[1].len(), 4);
        let o = orbit_of(&Character::new(3, 1, vec![1]), 7);
        assert_eq!(o.size(), 1);
        let t = enumerate_orbits(5, GammaQuotient::new(2, 2, 0).unwrap(), None).unwrap();
        assert_eq!(t.orbits.len(), 1);
        assert!(enumerate_orbits(3, GammaQuotient::new(3, 1, 1).unwrap(), None).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let q = GammaQuotient::new(3, 2, 3).unwrap();
        assert!(matches!(enumerate_orbits(2, q, Some(100)), Err(Error::Budget(_))));
    }
}
