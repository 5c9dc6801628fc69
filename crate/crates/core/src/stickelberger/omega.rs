//! Ω factors, exceptional zeros z_n and the level n̄ past which their ℓ-adic valuations
//! stop moving.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::assignment::{SplitData, StickelbergerInput};
use super::series::character_at_place;
use crate::arith;
use crate::coeff_rings::zl::bigint_valuation;
use crate::coeff_rings::CycloExact;
use crate::error::{Error, Result};
use crate::function_fields::Place;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceFactor {
    pub place: String,
    pub degree: u32,
    pub split: SplitData,
    /// Number of characters trivial at v.
    pub trivial_characters: u64,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub direct: BigInt,
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub closed_form: Option<BigInt>,
}

/// Levels from which the ℓ-adic valuations are constant; `None` when they grow forever.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub v0_level: Option<u32>,
    pub s_level: Option<u32>,
    /// max of the two.
    pub nbar: Option<u32>,
    /// Level from which z_n is constant.
    pub exceptional_zero_level: Option<u32>,
}

impl Stabilization {
    /// Level past which per-orbit assertions apply.
    pub fn assertion_level(&self) -> Option<u32> {
        Some(self.nbar?.max(self.exceptional_zero_level?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaReport {
    pub level: u32,
    pub z_n: u64,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub omega_v0: BigInt,
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub omega_v0_closed_form: Option<BigInt>,
    #[serde(serialize_with = "crate::bigjson::int")]
    pub omega_s: BigInt,
    pub per_place: Vec<PlaceFactor>,
    pub v_ell_omega_v0: Option<u32>,
    pub v_ell_omega_s: Option<u32>,
    pub stabilization: Stabilization,
}

fn big_pow(base: impl Into<BigInt>, e: u64) -> BigInt {
    num_traits::pow(base.into(), e as usize)
}

fn as_integer(x: &CycloExact, what: &str) -> Result<BigInt> {
    x.as_integer().ok_or_else(|| Error::cross(format!("{what} is not rational")))
}

/// (1 − q^{p^{n−n_0}·deg v_0})^{p^{n_0}}, or (1 − q^{deg v_0})^{p^n} while v_0 is split.
pub fn omega_v0_closed_form(q: u64, p: u64, n: u32, degree: u32, split: Option<u32>) -> BigInt {
    match split {
        Some(n0) if n > n0 => big_pow(
            BigInt::one() - big_pow(q, p.pow(n - n0) * degree as u64),
            p.pow(n0),
        ),
        _ => big_pow(BigInt::one() - big_pow(q, degree as u64), p.pow(n)),
    }
}

/// The v-factor of Ω_{n,S} from the splitting data of v.
pub fn place_factor_closed_form(p: u64, n: u32, degree: u32, split: SplitData) -> BigInt {
    let ns = split.split.unwrap_or(u32::MAX);
    if n <= ns {
        return big_pow(degree, p.pow(n));
    }
    let top = match split.inert {
        Some(ni) if n > ni => ni,
        _ => n,
    };
    big_pow(degree, p.pow(ns)) * big_pow(p, (top - ns) as u64 * p.pow(ns))
}

/// Smallest level from which v_ℓ(Ω_{n,v_0}) is constant.
pub fn v0_stabilization(q: u64, degree: u32, ell: u64, p: u64, split: Option<u32>) -> Option<u32> {
    let unit = arith::pow_mod(q % ell, degree as u64, ell) != 1;
    match split {
        None => unit.then_some(0),
        Some(n0) => {
            if q.is_multiple_of(ell) {
                return Some(0);
            }
            let order = arith::mult_order(q % ell, ell).expect("q is a unit mod ℓ");
            let rest = order / arith::gcd(order, degree as u64);
            let mut r = 0;
            let mut x = rest;
            while x.is_multiple_of(p) {
                x /= p;
                r += 1;
            }
            // q^{p^r deg v_0} ≡ 1 mod ℓ for some r only when `rest` is a power of p
            Some(if x == 1 { n0 + r } else { 0 })
        }
    }
}

/// max{n_v^s : v ∈ S, ℓ | deg v}, or 0.
pub fn s_stabilization(ell: u64, places: &[(u32, SplitData)]) -> Option<u32> {
    let mut level = 0;
    for &(degree, split) in places {
        if (degree as u64).is_multiple_of(ell) {
            level = level.max(split.split?);
        }
    }
    Some(level)
}

/// Ω_{n,v_0}, Ω_{n,S} and z_n by direct character products, checked against the closed
/// forms when Γ is procyclic.
pub fn omega_products(input: &StickelbergerInput) -> Result<(BigInt, BigInt, u64)> {
    let (v0, s, z, _, _) = omega_parts(input)?;
    Ok((v0, s, z))
}

type OmegaParts = (BigInt, BigInt, u64, Vec<PlaceFactor>, (Option<BigInt>, SplitData));

fn omega_parts(input: &StickelbergerInput) -> Result<OmegaParts> {
    let assignment = &input.assignment;
    let gamma = assignment.quotient();
    let (p, n, q) = (gamma.p, gamma.n, assignment.q());
    let characters: Vec<Vec<u64>> = (0..gamma.len() as u64).map(|i| gamma.to_vec(i)).collect();
    let one = CycloExact::one(p, n);

    let d0 = input.v0.degree();
    let qd = big_pow(q, d0 as u64);
    let mut acc = one.clone();
    for a in &characters {
        let chi = character_at_place(input, a, &input.v0)?;
        acc = acc.mul(&one.sub(&chi.scale(&qd)));
    }
    let omega_v0 = as_integer(&acc, "Ω_{n,v0}")?;
    let v0_split = assignment.split_data(&input.v0)?;
    let omega_v0_closed_form = (gamma.d == 1).then(|| omega_v0_closed_form(q, p, n, d0, v0_split.split));
    if let Some(c) = &omega_v0_closed_form {
        if *c != omega_v0 {
            return Err(Error::cross(format!("Ω_{{{n},v0}}: direct {omega_v0}, closed form {c}")));
        }
    }

    let mut per_place = Vec::with_capacity(input.s.len());
    let mut omega_s = BigInt::one();
    let mut z_n = 0u64;
    for v in &input.s {
        let split = assignment.split_data(v)?;
        let mut acc = one.clone();
        let mut trivial = 0u64;
        for a in &characters {
            let chi = character_at_place(input, a, v)?;
            if chi == one {
                trivial += 1;
                acc = acc.scale(&BigInt::from(v.degree()));
            } else {
                acc = acc.mul(&one.sub(&chi));
            }
        }
        let direct = as_integer(&acc, "v-factor of Ω_{n,S}")?;
        let closed_form = (gamma.d == 1).then(|| place_factor_closed_form(p, n, v.degree(), split));
        if let Some(c) = &closed_form {
            if *c != direct {
                return Err(Error::cross(format!(
                    "Ω factor at {}: direct {direct}, closed form {c}",
                    v.describe()
                )));
            }
        }
        if gamma.d == 1 {
            let expected = match assignment.class_of(v)? {
                None => 1,
                Some(_) => p.pow(n.min(split.split.unwrap_or(u32::MAX))),
            };
            if expected != trivial {
                return Err(Error::cross(format!(
                    "{} characters are trivial at {}, splitting data predicts {expected}",
                    trivial,
                    v.describe()
                )));
            }
        }
        z_n += trivial;
        omega_s *= &direct;
        per_place.push(PlaceFactor {
            place: v.describe(),
            degree: v.degree(),
            split,
            trivial_characters: trivial,
            direct,
            closed_form,
        });
    }

    Ok((omega_v0, omega_s, z_n, per_place, (omega_v0_closed_form, v0_split)))
}

pub fn omega_factors(input: &StickelbergerInput, ell: u64) -> Result<OmegaReport> {
    arith::require_prime(ell)?;
    let (omega_v0, omega_s, z_n, per_place, (omega_v0_closed_form, v0_split)) = omega_parts(input)?;
    let (p, n, q) = (input.assignment.p(), input.assignment.level(), input.assignment.q());
    let d0 = input.v0.degree();
    let splits: Vec<(u32, SplitData)> = per_place.iter().map(|f| (f.degree, f.split)).collect();
    let v0_level = v0_stabilization(q, d0, ell, p, v0_split.split);
    let s_level = s_stabilization(ell, &splits);
    let nbar = match (v0_level, s_level) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let exceptional_zero_level =
        splits.iter().try_fold(0u32, |acc, (_, s)| s.split.map(|x| acc.max(x)));
    Ok(OmegaReport {
        level: n,
        z_n,
        v_ell_omega_v0: bigint_valuation(&omega_v0, ell),
        v_ell_omega_s: bigint_valuation(&omega_s, ell),
        omega_v0,
        omega_v0_closed_form,
        omega_s,
        per_place,
        stabilization: Stabilization { v0_level, s_level, nbar, exceptional_zero_level },
    })
}

/// v_ℓ(Ω_{m,v0}·Ω_{m,S}) for m = 0..=n, checked to be constant from n̄ on.
pub fn omega_valuations(input: &StickelbergerInput, ell: u64) -> Result<Vec<Option<u32>>> {
    let n = input.assignment.level();
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut nbar = None;
    for m in 0..=n {
        let r = omega_factors(&input.restrict(m)?, ell)?;
        nbar = r.stabilization.nbar;
        out.push(match (r.v_ell_omega_v0, r.v_ell_omega_s) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        });
    }
    if let Some(nb) = nbar {
        let tail: Vec<&Option<u32>> = out.iter().skip(nb as usize).collect();
        if tail.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::cross(format!("v_ℓ(Ω) moves after the stabilization level {nb}: {out:?}")));
        }
    }
    Ok(out)
}

/// Σ_{v ∈ S} p^{min(n, v_p(deg v))}: exceptional zeros of the arithmetic tower.
pub fn arithmetic_exceptional_zeros(p: u64, n: u32, s: &[Place]) -> u64 {
    s.iter()
        .map(|v| p.pow(n.min(arith::v_p(v.degree() as u128, p).unwrap_or(0))))
        .sum()
}
